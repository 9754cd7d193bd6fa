#pragma once

#include <stdexcept>
#include <string>

namespace fracemb {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument sits on a pole of the Gamma function.
class pole_error : public error {
public:
    using error::error;
};

/// Argument outside the validated evaluation domain.
class domain_error : public error {
public:
    using error::error;
};

/// A series or iteration could not reach the requested accuracy.
class precision_loss_error : public error {
public:
    using error::error;
};

/// Invalid time grid (too few steps, a >= b, wrong origin).
class grid_error : public error {
public:
    using error::error;
};

/// Two objects that must share a grid or dimension do not.
class mismatch_error : public error {
public:
    using error::error;
};

class unsupported_power_error : public error {
public:
    using error::error;
};

/// v -> dL/dv could not be inverted.
class non_invertible_error : public error {
public:
    using error::error;
};

/// Numerical solution blew up or produced NaN.
class divergence_error : public error {
public:
    using error::error;
};

/// A sampled internal time fell outside the solved classical horizon.
class coverage_error : public error {
public:
    using error::error;
};

class degenerate_sample_error : public error {
public:
    using error::error;
};

}  // namespace fracemb
