#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "rislink/phase_noise.hpp"

namespace rislink {

OscillatorKind parse_oscillator_kind(std::string_view name) {
    if (name == "none") return OscillatorKind::none;
    if (name == "fro") return OscillatorKind::fro;
    if (name == "cpll") return OscillatorKind::cpll;
    throw std::invalid_argument("unknown oscillator kind '" + std::string(name) + "'");
}

std::string to_string(OscillatorKind k) {
    switch (k) {
        case OscillatorKind::none: return "none";
        case OscillatorKind::fro: return "fro";
        case OscillatorKind::cpll: return "cpll";
    }
    return "unknown";
}

double OscillatorModel::increment_variance() const { return 4.0 * kPi * linewidth * sample_period; }

void OscillatorModel::validate() const {
    if (!(linewidth >= 0.0) || !std::isfinite(linewidth))
        throw std::invalid_argument("OscillatorModel: linewidth must be finite and >= 0");
    if (!(sample_period > 0.0)) throw std::invalid_argument("OscillatorModel: sample period must be > 0");
    if (kind == OscillatorKind::cpll && !(loop_coefficient > 0.0))
        throw std::invalid_argument("OscillatorModel: PLL loop coefficient must be > 0");
}

PhaseNoiseTrace gen_trace(const OscillatorModel& model, int length, Rng& rng) {
    if (length < 1) throw std::invalid_argument("gen_trace: length must be >= 1");
    model.validate();
    PhaseNoiseTrace t{RealVector::Zero(length)};
    if (model.kind == OscillatorKind::none || model.linewidth == 0.0) return t;

    std::normal_distribution<double> normal(0.0, 1.0);
    if (model.kind == OscillatorKind::fro) {
        const double sigma = std::sqrt(model.increment_variance());
        for (int n = 1; n < length; ++n) t.theta[n] = t.theta[n - 1] + sigma * normal(rng);
        return t;
    }

    const double a = std::exp(-model.loop_coefficient * model.sample_period);
    const double stationary_var = kPi * model.linewidth / model.loop_coefficient;
    const double step_sigma = std::sqrt(stationary_var * (1.0 - a * a));
    double state = std::sqrt(stationary_var) * normal(rng);
    const double origin = state;
    for (int n = 1; n < length; ++n) {
        state = a * state + step_sigma * normal(rng);
        t.theta[n] = state - origin;
    }
    return t;
}

double variogram(const OscillatorModel& model, double lag) {
    if (!(lag >= 0.0)) throw std::invalid_argument("variogram: lag must be >= 0");
    switch (model.kind) {
        case OscillatorKind::none: return 0.0;
        case OscillatorKind::fro: return model.increment_variance() * lag;
        case OscillatorKind::cpll:
            return 2.0 * kPi * model.linewidth / model.loop_coefficient *
                   (1.0 - std::exp(-lag * model.loop_coefficient * model.sample_period));
    }
    return 0.0;
}

double psi_autocorr(const OscillatorModel& model, long m, long n) {
    if (m < 0 || n < 0) throw std::invalid_argument("psi_autocorr: indices must be >= 0");
    return std::exp(-variogram(model, static_cast<double>(std::labs(m - n))) / 2.0);
}

SampleVector apply_phase_noise(const SampleVector& s, const PhaseNoiseTrace& trace) {
    if (s.size() != trace.theta.size()) throw std::invalid_argument("apply_phase_noise: length mismatch");
    SampleVector r(s.size());
    for (Eigen::Index n = 0; n < s.size(); ++n) r[n] = std::polar(1.0, trace.theta[n]) * s[n];
    return r;
}

}  // namespace rislink
