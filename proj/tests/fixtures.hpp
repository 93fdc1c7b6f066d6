#ifndef CHASM_TESTS_FIXTURES_HPP
#define CHASM_TESTS_FIXTURES_HPP

#include <chasm/metrics.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace fixtures {

struct Sequence {
    std::int64_t tau;
    std::optional<std::int64_t> tau_hat;
    chasm::Outcome expected;
};

// Hand-labelled with margins (0, 50).  Counts: 5 TP, 2 FP, 2 FN_late,
// 1 FN_none, so n_d = 9, P = 5/9, R = 5/10 and F1 = 2 (5/9)(1/2) / (5/9 + 1/2) = 10/19.
inline const std::vector<Sequence>& ten_sequences() {
    using chasm::Outcome;
    static const std::vector<Sequence> seqs{
        {200, 200, Outcome::TP},       {150, 199, Outcome::TP},      {250, 300, Outcome::TP},
        {120, 121, Outcome::TP},       {280, 305, Outcome::TP},      {200, 199, Outcome::FP},
        {260, 40, Outcome::FP},        {200, 251, Outcome::FN_late}, {130, 399, Outcome::FN_late},
        {240, std::nullopt, Outcome::FN_none},
    };
    return seqs;
}

inline const double ten_sequence_precision = 5.0 / 9.0;
inline const double ten_sequence_recall = 5.0 / 10.0;
inline const double ten_sequence_f1 = 2.0 * (5.0 / 9.0) * (5.0 / 10.0) / (5.0 / 9.0 + 5.0 / 10.0);

} // namespace fixtures

#endif
