#include "selgeo/step.hpp"

#include <cmath>
#include <stdexcept>

namespace selgeo {

std::string loss_name(LossKind loss) {
    switch (loss) {
        case LossKind::CDT: return "cdt";
        case LossKind::LDT: return "ldt";
        case LossKind::CE: return "ce";
    }
    return "?";
}

LossKind loss_from_name(const std::string& name) {
    if (name == "cdt" || name == "CDT") return LossKind::CDT;
    if (name == "ldt" || name == "LDT") return LossKind::LDT;
    if (name == "ce" || name == "CE") return LossKind::CE;
    throw std::invalid_argument("unknown loss kind: " + name);
}

namespace {
// Nearest-integer cast with an integrality check.
int integral(double x, const char* what) {
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9)
        throw std::invalid_argument(std::string(what) + " is not integral: " + std::to_string(x));
    return static_cast<int>(r);
}
}  // namespace

int StepSetting::k_min() const { return integral(rho * k, "rho*k"); }

long StepSetting::n_cols() const {
    // alpha * k * (R * (1-rho) + rho) = k_maj * (alpha R) + k_min * alpha
    const std::int64_t alpha_r = static_cast<std::int64_t>(alpha) * R.num / R.den;
    return static_cast<long>(k_maj() * alpha_r + static_cast<std::int64_t>(k_min()) * alpha);
}

long StepSetting::n_samples() const {
    long total = 0;
    for (int c = 0; c < k; ++c) total += samples_in_class(c);
    return total;
}

long StepSetting::samples_in_class(int c) const {
    if (is_majority(c)) {
        const std::int64_t v = static_cast<std::int64_t>(n_min) * R.num;
        if (v % R.den != 0)
            throw std::invalid_argument("R * n_min is not integral for majority class sizes");
        return static_cast<long>(v / R.den);
    }
    return n_min;
}

Eigen::VectorXd StepSetting::delta(bool normalized) const {
    Eigen::VectorXd d(k);
    for (int c = 0; c < k; ++c) d[c] = is_majority(c) ? delta_maj : delta_minor;
    if (normalized) d *= static_cast<double>(k) / d.sum();
    return d;
}

Eigen::VectorXi StepSetting::sample_labels() const {
    Eigen::VectorXi labels(n_samples());
    long pos = 0;
    for (int c = 0; c < k; ++c) {
        const long m = samples_in_class(c);
        for (long i = 0; i < m; ++i) labels[pos++] = c;
    }
    return labels;
}

void StepSetting::validate() const {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0,1)");
    integral(rho * k, "rho*k");
    integral((1.0 - rho) * k, "(1-rho)*k");
    if (k_min() < 1 || k_maj() < 1) throw std::invalid_argument("both class groups must be non-empty");
    if (R.num <= 0) throw std::invalid_argument("R must be positive");
    if (n_min < 1) throw std::invalid_argument("n_min must be >= 1");
    if (alpha < 1) throw std::invalid_argument("alpha must be >= 1");
    if (!R.integral_multiple(alpha))
        throw std::invalid_argument("alpha * R must be an integer (alpha=" + std::to_string(alpha) +
                                    ", R=" + R.str() + ")");
    if (!(delta_maj > 0.0) || !(delta_minor > 0.0))
        throw std::invalid_argument("delta entries must be positive");
    if (gamma.has_value()) {
        const double expect = std::pow(r_value(), *gamma);
        if (std::abs(ratio() - expect) > 1e-12 * std::max(1.0, expect))
            throw std::invalid_argument("delta_maj/delta_minor does not equal R^gamma");
    }
    if (n_cols() < k) throw std::invalid_argument("SEL matrix would have fewer columns than classes");
}

StepSetting StepSetting::from_gamma(int k, double rho, Rational R, double gamma, int n_min) {
    StepSetting s;
    s.k = k;
    s.rho = rho;
    s.R = R;
    s.n_min = n_min;
    s.alpha = static_cast<int>(R.smallest_alpha());
    s.delta_minor = 1.0;
    s.delta_maj = std::pow(R.value(), gamma);
    s.gamma = gamma;
    s.validate();
    return s;
}

}  // namespace selgeo
