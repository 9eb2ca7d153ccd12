#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rislink/channel.hpp"

namespace rislink {

const TdlProfile& tdl_c() {
    static const TdlProfile profile{
        {0.0, 0.2099, 0.2219, 0.2329, 0.2176, 0.6366, 0.6448, 0.6560, 0.6584, 0.7935, 0.8213, 0.9336,
         1.2285, 1.3083, 2.1704, 2.7105, 4.2589, 4.6003, 5.4902, 5.6077, 6.3065, 6.6374, 7.0427, 8.6523},
        {-4.4, -1.2, -3.5, -5.2, -2.5, 0.0, -2.2, -3.9, -7.4, -7.1, -10.7, -11.1,
         -5.1, -6.8, -8.7, -13.2, -13.9, -13.9, -15.8, -17.1, -16.0, -15.7, -21.6, -22.8}};
    return profile;
}

namespace {

int tap_of(double normalized_delay, double delay_spread, double sample_period) {
    return static_cast<int>(std::lround(normalized_delay * delay_spread / sample_period));
}

// Response of one hop on every sample: out(n, l) = sum_{p: tap l} gain_p e^{j 2 pi nu_p n Ts}.
ComplexMatrix hop_response(const PathSet& hop, int taps, int n_samples, double sample_period) {
    ComplexMatrix out = ComplexMatrix::Zero(n_samples, taps);
    for (const auto& p : hop.paths) {
        const cd step = std::polar(1.0, 2.0 * kPi * p.doppler * sample_period);
        cd phasor = p.gain;
        for (int n = 0; n < n_samples; ++n) {
            out(n, p.delay_tap) += phasor;
            phasor *= step;
        }
    }
    return out;
}

// Cascade of one element at sample 0 (all Doppler phases equal one).
std::vector<cd> cascade_at_origin(const RisElement& e, int taps) {
    std::vector<cd> u(static_cast<std::size_t>(taps), cd{});
    std::vector<cd> v(static_cast<std::size_t>(taps), cd{});
    for (const auto& p : e.uplink.paths) u[p.delay_tap] += p.gain;
    for (const auto& p : e.downlink.paths) v[p.delay_tap] += p.gain;
    std::vector<cd> h(static_cast<std::size_t>(taps), cd{});
    for (int lu = 0; lu < taps; ++lu)
        for (int lv = 0; lu + lv < taps; ++lv) h[lu + lv] += u[lu] * v[lv];
    return h;
}

}  // namespace

int tdl_max_tap(const TdlProfile& profile, double delay_spread, double sample_period) {
    int max_tap = 0;
    for (double d : profile.normalized_delays) max_tap = std::max(max_tap, tap_of(d, delay_spread, sample_period));
    return max_tap;
}

PathSet sample_tdl_paths(const TdlProfile& profile, double delay_spread, double sample_period, Rng& rng,
                         int sinusoids_per_path) {
    if (!(delay_spread >= 0.0) || !(sample_period > 0.0))
        throw std::invalid_argument("sample_tdl_paths: delay spread must be >= 0 and sample period > 0");
    if (sinusoids_per_path < 1) throw std::invalid_argument("sample_tdl_paths: sinusoids_per_path must be >= 1");

    double total = 0.0;
    for (double db : profile.powers_db) total += std::pow(10.0, db / 10.0);

    std::normal_distribution<double> normal(0.0, 1.0);
    PathSet set;
    set.taps = tdl_max_tap(profile, delay_spread, sample_period) + 1;
    for (std::size_t k = 0; k < profile.normalized_delays.size(); ++k) {
        const double power = std::pow(10.0, profile.powers_db[k] / 10.0) / total / sinusoids_per_path;
        const double sigma = std::sqrt(power / 2.0);
        const int tap = tap_of(profile.normalized_delays[k], delay_spread, sample_period);
        for (int s = 0; s < sinusoids_per_path; ++s) {
            const double re = normal(rng);
            const double im = normal(rng);
            set.paths.push_back({cd{sigma * re, sigma * im}, tap, 0.0});
        }
    }
    return set;
}

std::vector<double> sample_jakes_doppler(int count, double max_doppler, Rng& rng) {
    if (!(max_doppler >= 0.0)) throw std::invalid_argument("sample_jakes_doppler: negative maximum Doppler");
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
    for (auto& nu : out) nu = max_doppler * std::cos(angle(rng));
    return out;
}

PathSet sample_link(const TdlProfile& profile, double delay_spread, double sample_period, double max_doppler,
                    Rng& rng, int sinusoids_per_path) {
    PathSet set = sample_tdl_paths(profile, delay_spread, sample_period, rng, sinusoids_per_path);
    const auto nu = sample_jakes_doppler(static_cast<int>(set.paths.size()), max_doppler, rng);
    for (std::size_t i = 0; i < nu.size(); ++i) set.paths[i].doppler = nu[i];
    return set;
}

int RisChannel::uplink_taps() const {
    int t = 1;
    for (const auto& e : elements) t = std::max(t, e.uplink.taps);
    return t;
}

int RisChannel::downlink_taps() const {
    int t = 1;
    for (const auto& e : elements) t = std::max(t, e.downlink.taps);
    return t;
}

TapGainMatrix cascade_ris_channel(const RisChannel& ris, int n_samples, double sample_period) {
    if (n_samples < 1) throw std::invalid_argument("cascade_ris_channel: n_samples must be >= 1");
    if (ris.elements.empty()) throw std::invalid_argument("cascade_ris_channel: no RIS elements");

    const int lu_count = ris.uplink_taps();
    const int lv_count = ris.downlink_taps();
    TapGainMatrix g;
    g.gains = ComplexMatrix::Zero(n_samples, lu_count + lv_count - 1);
    for (const auto& e : ris.elements) {
        const ComplexMatrix u = hop_response(e.uplink, lu_count, n_samples, sample_period);
        const ComplexMatrix v = hop_response(e.downlink, lv_count, n_samples, sample_period);
        for (int lu = 0; lu < lu_count; ++lu)
            for (int lv = 0; lv < lv_count; ++lv)
                g.gains.col(lu + lv) += e.reflection * v.col(lv).cwiseProduct(u.col(lu));
    }
    g.gains /= std::sqrt(static_cast<double>(ris.size()));
    g.includes_ris_phases = true;
    g.includes_phase_noise = false;
    return g;
}

SampleVector apply_channel(const SampleVector& s, const TapGainMatrix& g) {
    if (s.size() != g.gains.rows()) throw std::invalid_argument("apply_channel: length mismatch");
    const Eigen::Index n = s.size();
    const Eigen::Index taps = g.gains.cols();
    SampleVector r = SampleVector::Zero(n);
    for (Eigen::Index l = 0; l < taps; ++l)
        for (Eigen::Index i = l; i < n; ++i) r[i] += g.gains(i, l) * s[i - l];
    return r;
}

SampleVector apply_channel_adjoint(const SampleVector& r, const TapGainMatrix& g) {
    if (r.size() != g.gains.rows()) throw std::invalid_argument("apply_channel_adjoint: length mismatch");
    const Eigen::Index n = r.size();
    const Eigen::Index taps = g.gains.cols();
    SampleVector s = SampleVector::Zero(n);
    for (Eigen::Index l = 0; l < taps; ++l)
        for (Eigen::Index i = l; i < n; ++i) s[i - l] += std::conj(g.gains(i, l)) * r[i];
    return s;
}

RisStrategy parse_ris_strategy(std::string_view name) {
    if (name == "statistical_align") return RisStrategy::statistical_align;
    if (name == "random") return RisStrategy::random;
    if (name == "all_ones") return RisStrategy::all_ones;
    throw std::invalid_argument("unknown RIS strategy '" + std::string(name) + "'");
}

std::string to_string(RisStrategy s) {
    switch (s) {
        case RisStrategy::statistical_align: return "statistical_align";
        case RisStrategy::random: return "random";
        case RisStrategy::all_ones: return "all_ones";
    }
    return "unknown";
}

RisChannel design_ris_phases(RisChannel ris, RisStrategy strategy, Rng& rng) {
    switch (strategy) {
        case RisStrategy::all_ones:
            for (auto& e : ris.elements) e.reflection = 1.0;
            break;
        case RisStrategy::random: {
            std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
            for (auto& e : ris.elements) e.reflection = std::polar(1.0, phase(rng));
            break;
        }
        case RisStrategy::statistical_align: {
            const int taps = ris.cascade_taps();
            std::vector<std::vector<cd>> h;
            std::vector<double> tap_power(static_cast<std::size_t>(taps), 0.0);
            for (const auto& e : ris.elements) {
                h.push_back(cascade_at_origin(e, taps));
                for (int l = 0; l < taps; ++l) tap_power[l] += std::norm(h.back()[l]);
            }
            const auto best = static_cast<std::size_t>(
                std::max_element(tap_power.begin(), tap_power.end()) - tap_power.begin());
            for (std::size_t i = 0; i < ris.elements.size(); ++i) {
                const cd dominant = h[i][best];
                ris.elements[i].reflection = std::abs(dominant) > 0.0 ? std::polar(1.0, -std::arg(dominant)) : cd{1.0};
            }
            break;
        }
    }
    return ris;
}

SampleVector add_awgn(const SampleVector& s, double variance, Rng& rng) {
    if (!(variance >= 0.0)) throw std::invalid_argument("add_awgn: negative noise variance");
    SampleVector out = s;
    if (variance == 0.0) return out;
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (auto& v : out) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += cd{re, im};
    }
    return out;
}

}  // namespace rislink
