#include <stdexcept>

#include "rislink/estimation.hpp"

namespace rislink {

SnapshotEstimate stage1_estimate(const SampleVector& r, const PilotPattern& pattern, int L, double noise_variance,
                                 double threshold) {
    if (L < 1) throw std::invalid_argument("stage1_estimate: L must be >= 1");
    if (!(pattern.amplitude > 0.0)) throw std::invalid_argument("stage1_estimate: pilot amplitude must be positive");
    const int np = pattern.pilot_count();

    SnapshotEstimate snap;
    snap.pilot_indices = pattern.frame_indices();
    snap.taps = ComplexMatrix::Zero(L, np);
    snap.active.assign(static_cast<std::size_t>(L), false);
    for (int p = 0; p < np; ++p) {
        const int m = snap.pilot_indices[static_cast<std::size_t>(p)];
        if (m < 0 || m + L > r.size()) throw std::invalid_argument("stage1_estimate: pilot window outside frame");
        for (int l = 0; l < L; ++l) snap.taps(l, p) = r[m + l] / pattern.amplitude;
    }

    const double floor = threshold * threshold * noise_variance / (pattern.amplitude * pattern.amplitude);
    for (int l = 0; l < L; ++l) {
        const double power = np > 0 ? snap.taps.row(l).squaredNorm() / np : 0.0;
        snap.active[static_cast<std::size_t>(l)] = power > floor;
        if (!snap.active[static_cast<std::size_t>(l)]) snap.taps.row(l).setZero();
    }
    return snap;
}

double nmse(const TapGainMatrix& estimate, const TapGainMatrix& reference) {
    if (estimate.gains.rows() != reference.gains.rows() || estimate.gains.cols() != reference.gains.cols())
        throw std::invalid_argument("nmse: dimension mismatch");
    const double ref = reference.gains.squaredNorm();
    if (ref == 0.0) throw std::invalid_argument("nmse: reference has zero norm");
    return (estimate.gains - reference.gains).squaredNorm() / ref;
}

}  // namespace rislink
