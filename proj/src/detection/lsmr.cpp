#include <cmath>
#include <stdexcept>

#include "rislink/detection.hpp"

namespace rislink {

namespace {

ComplexVector random_vector(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexVector v(n);
    for (auto& z : v) {
        const double re = normal(rng);
        const double im = normal(rng);
        z = cd{re, im};
    }
    return v;
}

void dot_test(const LinearOperator& apply, const LinearOperator& apply_adjoint, Eigen::Index rows,
              Eigen::Index cols) {
    Rng rng(0x5eed);
    const ComplexVector x = random_vector(cols, rng);
    const ComplexVector y = random_vector(rows, rng);
    const ComplexVector ax = apply(x);
    const ComplexVector ahy = apply_adjoint(y);
    if (ax.size() != rows || ahy.size() != cols) throw std::invalid_argument("lsmr_solve: operator size mismatch");
    const cd lhs = ax.dot(y);   // <Ax, y>
    const cd rhs = x.dot(ahy);  // <x, A^H y>
    const double scale = ax.norm() * y.norm() + x.norm() * ahy.norm();
    if (std::abs(lhs - rhs) > 1e-6 * scale)
        throw std::invalid_argument("lsmr_solve: apply_adjoint is not the adjoint of apply (dot test failed)");
}

}  // namespace

LsmrResult lsmr_solve(const LinearOperator& apply, const LinearOperator& apply_adjoint, const ComplexVector& b,
                      Eigen::Index cols, const LsmrOptions& options) {
    if (options.max_iterations < 1) throw std::invalid_argument("lsmr_solve: max_iterations must be >= 1");
    if (!(options.damping >= 0.0)) throw std::invalid_argument("lsmr_solve: damping must be >= 0");
    if (options.verify_adjoint) dot_test(apply, apply_adjoint, b.size(), cols);

    const double damp = options.damping;
    const double tol = options.tolerance;

    LsmrResult res;
    res.x = ComplexVector::Zero(cols);

    ComplexVector u = b;
    double beta = u.norm();
    if (beta > 0) u /= beta;
    ComplexVector v = beta > 0 ? apply_adjoint(u) : ComplexVector::Zero(cols);
    double alpha = v.norm();
    if (alpha > 0) v /= alpha;

    const double normb = beta;
    res.residual_norm = beta;
    if (alpha * beta == 0.0) {
        res.converged = true;
        return res;
    }

    double zetabar = alpha * beta;
    double alphabar = alpha;
    double rho = 1, rhobar = 1, cbar = 1, sbar = 0;
    ComplexVector h = v;
    ComplexVector hbar = ComplexVector::Zero(cols);

    // Residual-norm recurrences.
    double betadd = beta, betad = 0, rhodold = 1, tautildeold = 0, thetatilde = 0, zeta = 0, dsum = 0;
    double norm_a2 = alpha * alpha;

    for (int it = 1; it <= options.max_iterations; ++it) {
        res.iterations = it;

        u = apply(v) - alpha * u;
        beta = u.norm();
        if (beta > 0) {
            u /= beta;
            v = apply_adjoint(u) - beta * v;
            alpha = v.norm();
            if (alpha > 0) v /= alpha;
        }

        // Damping rotation.
        const double alphahat = std::hypot(alphabar, damp);
        const double chat = alphabar / alphahat;
        const double shat = damp / alphahat;

        // Rotation Q_i turning B_i into R_i.
        const double rhoold = rho;
        rho = std::hypot(alphahat, beta);
        const double c = alphahat / rho;
        const double s = beta / rho;
        const double thetanew = s * alpha;
        alphabar = c * alpha;

        // Rotation Qbar_i turning R_i^T into Rbar_i.
        const double rhobarold = rhobar;
        const double zetaold = zeta;
        const double thetabar = sbar * rho;
        const double rhotemp = cbar * rho;
        rhobar = std::hypot(rhotemp, thetanew);
        cbar = rhotemp / rhobar;
        sbar = thetanew / rhobar;
        zeta = cbar * zetabar;
        zetabar = -sbar * zetabar;

        hbar = h - (thetabar * rho / (rhoold * rhobarold)) * hbar;
        res.x += (zeta / (rho * rhobar)) * hbar;
        h = v - (thetanew / rho) * h;

        // ||r_k|| estimate.
        const double betaacute = chat * betadd;
        const double betacheck = -shat * betadd;
        const double betahat = c * betaacute;
        betadd = -s * betaacute;
        const double thetatildeold = thetatilde;
        const double rhotildeold = std::hypot(rhodold, thetabar);
        const double ctildeold = rhodold / rhotildeold;
        const double stildeold = thetabar / rhotildeold;
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;
        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        const double taud = (zeta - thetatilde * tautildeold) / rhodold;
        dsum += betacheck * betacheck;
        const double normr = std::sqrt(dsum + (betad - taud) * (betad - taud) + betadd * betadd);
        res.residual_norm = normr;

        norm_a2 += beta * beta;
        const double norm_a = std::sqrt(norm_a2);
        norm_a2 += alpha * alpha;

        const double normar = std::abs(zetabar);
        const double normx = res.x.norm();
        if (normr <= tol * normb + tol * norm_a * normx || normar <= tol * norm_a * normr || normr == 0.0) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace rislink
