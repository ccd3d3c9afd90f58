#pragma once

namespace mixkin {

// Lower regularized incomplete gamma P(shape, x), series for x < shape+1 and
// continued fraction otherwise.
double lower_regularized_gamma(double shape, double x);

// log of the gamma(shape, scale) density at x. x must be > 0.
double log_gamma_pdf(double x, double shape, double scale);

// log of the gamma(shape, scale) CDF at x; stays accurate in both tails
// (log-space series on the left, log1p of the upper tail on the right).
// x == 0 gives -inf.
double log_gamma_cdf(double x, double shape, double scale);

}  // namespace mixkin
