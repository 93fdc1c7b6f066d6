#ifndef CHASM_CHASM_HPP
#define CHASM_CHASM_HPP

/** @file
 * Complex Hungarian-Aligned Spectrum Monitoring: streaming changepoint
 * detection from the spectrum of an online linear-dynamics estimate.
 */

#include <chasm/bias_lab.hpp>
#include <chasm/dynamics.hpp>
#include <chasm/errors.hpp>
#include <chasm/metrics.hpp>
#include <chasm/mewma.hpp>
#include <chasm/parallel.hpp>
#include <chasm/pipeline.hpp>
#include <chasm/spectrum.hpp>
#include <chasm/synthetic.hpp>

namespace chasm {
inline constexpr const char* version = "0.1.0";
}

#endif
