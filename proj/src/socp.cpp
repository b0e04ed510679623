// SPDX-License-Identifier: Apache-2.0
//
// damlink - multi-user single-carrier delay alignment modulation toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dam/socp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace dam::socp
{

int Problem::cone_size() const
{
    int m = n_pos;
    for (int q : soc_dims)
        m += q;
    return m;
}

void Problem::validate() const
{
    if (num_vars() < 1)
        throw config_error("socp: empty variable vector");
    if (G.rows() != cone_size() || G.cols() != num_vars())
        throw config_error("socp: G dimension mismatch");
    if (h.size() != cone_size())
        throw config_error("socp: h dimension mismatch");
    if (A.rows() > 0 && A.cols() != num_vars())
        throw config_error("socp: A dimension mismatch");
    if (b.size() != A.rows())
        throw config_error("socp: b dimension mismatch");
    if (n_pos < 0)
        throw config_error("socp: negative orthant size");
    for (int q : soc_dims)
        if (q < 1)
            throw config_error("socp: SOC dimension must be positive");
    if (cone_size() < 1)
        throw config_error("socp: empty cone");
}

bool is_solved(Status s)
{
    return s == Status::optimal || s == Status::near_optimal;
}

const char *status_name(Status s)
{
    switch (s)
    {
    case Status::optimal: return "optimal";
    case Status::near_optimal: return "near_optimal";
    case Status::primal_infeasible: return "primal_infeasible";
    case Status::dual_infeasible: return "dual_infeasible";
    case Status::max_iterations: return "max_iterations";
    case Status::numerical_limits: return "numerical_limits";
    }
    return "unknown";
}

namespace
{

struct ConeLayout
{
    int n_pos;
    std::vector<int> soc_start;  // offsets of SOC blocks in s/z vectors
    std::vector<int> soc_dim;
    int total;
    int degree;  // n_pos + number of SOCs
};

// Nesterov-Todd scaling state. For the orthant block W is diagonal; for each
// second-order cone W is the dense symmetric scaling matrix with
// W^2 z = s at the scaling point.
struct Scaling
{
    VectorXd pos_w;                 // sqrt(s_i/z_i)
    std::vector<MatrixXd> soc_w;    // per-cone W
    std::vector<MatrixXd> soc_w2;   // per-cone W^2
    VectorXd lambda;                // W z

    void multiply(const ConeLayout &lay, const VectorXd &v, VectorXd &out) const
    {
        out.resize(lay.total);
        out.head(lay.n_pos) = pos_w.cwiseProduct(v.head(lay.n_pos));
        for (std::size_t i = 0; i < soc_w.size(); i++)
            out.segment(lay.soc_start[i], lay.soc_dim[i]).noalias() =
                soc_w[i] * v.segment(lay.soc_start[i], lay.soc_dim[i]);
    }
};

double soc_residual(const Eigen::Ref<const VectorXd> &u)
{
    return u(0) - u.tail(u.size() - 1).norm();
}

// Shift r into the interior of the cone: r + (1 + alpha) e.
void bring_to_cone(const ConeLayout &lay, const VectorXd &r, VectorXd &s)
{
    double alpha = -0.99;
    for (int i = 0; i < lay.n_pos; i++)
        if (r(i) <= 0. && -r(i) > alpha)
            alpha = -r(i);
    for (std::size_t i = 0; i < lay.soc_start.size(); i++)
    {
        const double res = soc_residual(r.segment(lay.soc_start[i], lay.soc_dim[i]));
        if (res <= 0. && -res > alpha)
            alpha = -res;
    }
    alpha += 1.;
    s = r;
    s.head(lay.n_pos).array() += alpha;
    for (std::size_t i = 0; i < lay.soc_start.size(); i++)
        s(lay.soc_start[i]) += alpha;
}

bool update_scaling(const ConeLayout &lay, const VectorXd &s, const VectorXd &z, Scaling &w)
{
    w.pos_w.resize(lay.n_pos);
    for (int i = 0; i < lay.n_pos; i++)
    {
        if (s(i) <= 0. || z(i) <= 0.)
            return false;
        w.pos_w(i) = std::sqrt(s(i) / z(i));
        w.lambda(i) = std::sqrt(s(i) * z(i));
    }

    w.soc_w.resize(lay.soc_start.size());
    w.soc_w2.resize(lay.soc_start.size());
    for (std::size_t i = 0; i < lay.soc_start.size(); i++)
    {
        const int d = lay.soc_dim[i];
        const auto sk = s.segment(lay.soc_start[i], d);
        const auto zk = z.segment(lay.soc_start[i], d);
        const double sres = sk(0) * sk(0) - sk.tail(d - 1).squaredNorm();
        const double zres = zk(0) * zk(0) - zk.tail(d - 1).squaredNorm();
        if (sres <= 0. || zres <= 0.)
            return false;

        const VectorXd sbar = sk / std::sqrt(sres);
        const VectorXd zbar = zk / std::sqrt(zres);
        const double gamma = std::sqrt((1. + sbar.dot(zbar)) / 2.);

        VectorXd wbar(d);
        wbar(0) = (sbar(0) + zbar(0)) / (2. * gamma);
        wbar.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2. * gamma);

        const double eta = std::pow(sres / zres, 0.25);

        MatrixXd wm(d, d);
        wm(0, 0) = wbar(0);
        wm.block(0, 1, 1, d - 1) = wbar.tail(d - 1).transpose();
        wm.block(1, 0, d - 1, 1) = wbar.tail(d - 1);
        wm.block(1, 1, d - 1, d - 1) = MatrixXd::Identity(d - 1, d - 1) +
                                       wbar.tail(d - 1) * wbar.tail(d - 1).transpose() / (1. + wbar(0));
        wm *= eta;
        w.soc_w[i] = wm;
        w.soc_w2[i].noalias() = wm * wm;

        w.lambda.segment(lay.soc_start[i], d).noalias() = wm * zk;
    }
    return true;
}

// Jordan-algebra product u o v.
void conic_product(const ConeLayout &lay, const VectorXd &u, const VectorXd &v, VectorXd &out)
{
    out.resize(lay.total);
    out.head(lay.n_pos) = u.head(lay.n_pos).cwiseProduct(v.head(lay.n_pos));
    for (std::size_t i = 0; i < lay.soc_start.size(); i++)
    {
        const int o = lay.soc_start[i];
        const int d = lay.soc_dim[i];
        out(o) = u.segment(o, d).dot(v.segment(o, d));
        out.segment(o + 1, d - 1) = u(o) * v.segment(o + 1, d - 1) + v(o) * u.segment(o + 1, d - 1);
    }
}

// Jordan-algebra division out = u \ v.
void conic_division(const ConeLayout &lay, const VectorXd &u, const VectorXd &v, VectorXd &out)
{
    out.resize(lay.total);
    out.head(lay.n_pos) = v.head(lay.n_pos).cwiseQuotient(u.head(lay.n_pos));
    for (std::size_t i = 0; i < lay.soc_start.size(); i++)
    {
        const int o = lay.soc_start[i];
        const int d = lay.soc_dim[i];
        const double u0 = u(o);
        const double v0 = v(o);
        const double rho = u0 * u0 - u.segment(o + 1, d - 1).squaredNorm();
        const double zeta = u.segment(o + 1, d - 1).dot(v.segment(o + 1, d - 1));
        const double factor = (zeta / u0 - v0) / rho;
        out(o) = (u0 * v0 - zeta) / rho;
        out.segment(o + 1, d - 1) = factor * u.segment(o + 1, d - 1) + v.segment(o + 1, d - 1) / u0;
    }
}

// Largest step size along (ds, dz) keeping lambda + alpha d inside the cone,
// with ds and dz given in the scaled space.
double line_search(const ConeLayout &lay, const VectorXd &lambda, const VectorXd &ds,
                   const VectorXd &dz, double tau, double dtau, double kap, double dkap)
{
    double alpha = 2.;
    for (int i = 0; i < lay.n_pos; i++)
    {
        const double rho = ds(i) / lambda(i);
        const double sig = dz(i) / lambda(i);
        if (rho < 0.)
            alpha = std::min(alpha, -1. / rho);
        if (sig < 0.)
            alpha = std::min(alpha, -1. / sig);
    }

    if (dtau < 0.)
        alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0.)
        alpha = std::min(alpha, -kap / dkap);

    for (std::size_t i = 0; i < lay.soc_start.size(); i++)
    {
        const int o = lay.soc_start[i];
        const int d = lay.soc_dim[i];
        const double lres = lambda(o) * lambda(o) - lambda.segment(o + 1, d - 1).squaredNorm();
        if (lres <= 0.)
            continue;
        const double lnorm = std::sqrt(lres);
        const VectorXd lbar = lambda.segment(o, d) / lnorm;

        const auto bound_from = [&](const VectorXd &dv) {
            const double lbar_dot = lbar(0) * dv(o) - lbar.tail(d - 1).dot(dv.segment(o + 1, d - 1));
            const double factor = (lbar_dot + dv(o)) / (lbar(0) + 1.);
            VectorXd rho(d);
            rho(0) = lbar_dot / lnorm;
            rho.tail(d - 1) = (dv.segment(o + 1, d - 1) - factor * lbar.tail(d - 1)) / lnorm;
            return rho.tail(d - 1).norm() - rho(0);
        };

        const double worst = std::max({0., bound_from(ds), bound_from(dz)});
        if (worst > 0.)
            alpha = std::min(alpha, 1. / worst);
    }
    return std::min(alpha, 1.);
}

class Ipm
{
public:
    Ipm(const Problem &prob, const Settings &settings) : p_(prob), set_(settings)
    {
        n_ = prob.num_vars();
        me_ = prob.num_eq();
        lay_.n_pos = prob.n_pos;
        lay_.total = prob.cone_size();
        lay_.degree = prob.n_pos + static_cast<int>(prob.soc_dims.size());
        int off = prob.n_pos;
        for (int q : prob.soc_dims)
        {
            lay_.soc_start.push_back(off);
            lay_.soc_dim.push_back(q);
            off += q;
        }
        m_ = lay_.total;
        dim_ = n_ + me_ + m_;
        w_.lambda.resize(m_);
    }

    Solution run();

private:
    void assemble_kkt(bool identity_scaling);
    void factorize() { lu_.compute(kkt_); }
    // Residual-corrected solve of the unregularized KKT system.
    void solve_kkt(const VectorXd &rhs, VectorXd &dx, VectorXd &dy, VectorXd &dz,
                   bool identity_scaling) const;
    void kkt_multiply(const VectorXd &v, VectorXd &out, bool identity_scaling) const;

    const Problem &p_;
    Settings set_;
    ConeLayout lay_;
    int n_, me_, m_, dim_;

    Scaling w_;
    MatrixXd kkt_;
    Eigen::PartialPivLU<MatrixXd> lu_;
};

void Ipm::assemble_kkt(bool identity_scaling)
{
    const double reg = set_.static_regularization;
    kkt_.setZero(dim_, dim_);
    kkt_.block(0, 0, n_, n_).diagonal().setConstant(reg);
    if (me_ > 0)
    {
        kkt_.block(0, n_, n_, me_) = p_.A.transpose();
        kkt_.block(n_, 0, me_, n_) = p_.A;
        kkt_.block(n_, n_, me_, me_).diagonal().setConstant(-reg);
    }
    kkt_.block(0, n_ + me_, n_, m_) = p_.G.transpose();
    kkt_.block(n_ + me_, 0, m_, n_) = p_.G;

    auto wblock = kkt_.block(n_ + me_, n_ + me_, m_, m_);
    if (identity_scaling)
    {
        wblock.diagonal().setConstant(-1. - reg);
    }
    else
    {
        for (int i = 0; i < lay_.n_pos; i++)
            wblock(i, i) = -w_.pos_w(i) * w_.pos_w(i) - reg;
        for (std::size_t i = 0; i < lay_.soc_start.size(); i++)
        {
            const int o = lay_.soc_start[i];
            const int d = lay_.soc_dim[i];
            wblock.block(o, o, d, d) = -w_.soc_w2[i];
            wblock.block(o, o, d, d).diagonal().array() -= reg;
        }
    }
}

void Ipm::kkt_multiply(const VectorXd &v, VectorXd &out, bool identity_scaling) const
{
    out.setZero(dim_);
    const auto vx = v.head(n_);
    const auto vy = v.segment(n_, me_);
    const auto vz = v.tail(m_);

    out.head(n_) = p_.G.transpose() * vz;
    if (me_ > 0)
    {
        out.head(n_) += p_.A.transpose() * vy;
        out.segment(n_, me_) = p_.A * vx;
    }
    out.tail(m_) = p_.G * vx;
    if (identity_scaling)
    {
        out.tail(m_) -= vz;
    }
    else
    {
        out.tail(m_).head(lay_.n_pos) -=
            w_.pos_w.cwiseProduct(w_.pos_w).cwiseProduct(vz.head(lay_.n_pos));
        for (std::size_t i = 0; i < lay_.soc_start.size(); i++)
        {
            const int o = lay_.soc_start[i];
            const int d = lay_.soc_dim[i];
            out.segment(n_ + me_ + o, d).noalias() -= w_.soc_w2[i] * vz.segment(o, d);
        }
    }
}

void Ipm::solve_kkt(const VectorXd &rhs, VectorXd &dx, VectorXd &dy, VectorXd &dz,
                    bool identity_scaling) const
{
    VectorXd sol = lu_.solve(rhs);
    VectorXd resid(dim_), corr(dim_);
    for (int it = 0; it < set_.refinement_steps; it++)
    {
        kkt_multiply(sol, resid, identity_scaling);
        resid = rhs - resid;
        const double err = resid.lpNorm<Eigen::Infinity>();
        if (err < 1e-14 * (1. + rhs.lpNorm<Eigen::Infinity>()))
            break;
        corr = lu_.solve(resid);
        sol += corr;
    }
    dx = sol.head(n_);
    dy = sol.segment(n_, me_);
    dz = sol.tail(m_);
}

Solution Ipm::run()
{
    Solution sol;

    // Initial point from the identity-scaled KKT system.
    assemble_kkt(true);
    factorize();

    VectorXd rhs1 = VectorXd::Zero(dim_);
    rhs1.segment(n_, me_) = p_.b;
    rhs1.tail(m_) = p_.h;

    VectorXd x(n_), y(me_), s(m_), z(m_);
    VectorXd dx1(n_), dy1(me_), dz1(m_);
    solve_kkt(rhs1, dx1, dy1, dz1, true);
    x = dx1;
    bring_to_cone(lay_, -dz1, s);

    VectorXd rhs2 = VectorXd::Zero(dim_);
    rhs2.head(n_) = -p_.c;
    VectorXd dx2(n_), dy2(me_), dz2(m_);
    solve_kkt(rhs2, dx2, dy2, dz2, true);
    y = dy2;
    bring_to_cone(lay_, dz2, z);

    double tau = 1., kap = 1.;

    rhs1.head(n_) = -p_.c;

    const double resx0 = std::max(1., p_.c.norm());
    const double resy0 = std::max(1., p_.b.norm());
    const double resz0 = std::max(1., p_.h.norm());

    VectorXd rx(n_), ry(me_), rz(m_);
    VectorXd w_dz(m_), ds_by_w(m_), ds1(m_), ds2(m_), tmp(m_), ds(m_);

    const auto finish = [&](Status st, int iter) {
        sol.status = st;
        sol.iterations = iter;
        sol.x = x / tau;
        sol.y = y / tau;
        sol.z = z / tau;
        sol.s = s / tau;
        sol.primal_objective = p_.c.dot(sol.x);
        sol.dual_objective = -(p_.b.dot(sol.y) + p_.h.dot(sol.z));
        sol.duality_gap = sol.primal_objective - sol.dual_objective;
        return sol;
    };

    for (int iter = 0; iter <= set_.max_iterations; iter++)
    {
        // Residuals of the homogeneous embedding.
        rx = -p_.G.transpose() * z;
        if (me_ > 0)
            rx -= p_.A.transpose() * y;
        const double hresx = rx.norm();
        rx -= tau * p_.c;

        double hresy = 0.;
        if (me_ > 0)
        {
            ry = p_.A * x;
            hresy = ry.norm();
            ry -= tau * p_.b;
        }

        rz = s + p_.G * x;
        const double hresz = rz.norm();
        rz -= tau * p_.h;

        const double cx = p_.c.dot(x);
        const double by = me_ > 0 ? p_.b.dot(y) : 0.;
        const double hz = p_.h.dot(z);
        const double rt = kap + cx + by + hz;

        const double nx = x.norm(), ny = y.norm(), nz = z.norm(), ns = s.norm();

        const double gap = s.dot(z);
        const double mu = (gap + kap * tau) / (lay_.degree + 1);
        const double pcost = cx / tau;
        const double dcost = -(hz + by) / tau;

        std::optional<double> relgap;
        if (pcost < 0.)
            relgap = gap / (-pcost);
        else if (dcost > 0.)
            relgap = gap / dcost;

        const double nry = me_ > 0 ? ry.norm() / std::max(resy0 + nx, 1.) : 0.;
        const double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.);
        const double pres = std::max(nry, nrz) / tau;
        const double dres = rx.norm() / std::max(resx0 + ny + nz, 1.) / tau;

        std::optional<double> pinfres, dinfres;
        if ((hz + by) / std::max(ny + nz, 1.) < -set_.reltol)
            pinfres = hresx / std::max(ny + nz, 1.);
        if (cx / std::max(nx, 1.) < -set_.reltol)
            dinfres = std::max(hresy / std::max(nx, 1.), hresz / std::max(nx + ns, 1.));

        const auto converged = [&](bool reduced) -> std::optional<Status> {
            const double feastol = reduced ? set_.feastol_reduced : set_.feastol;
            const double abstol = reduced ? set_.abstol_reduced : set_.abstol;
            const double reltol = reduced ? set_.reltol_reduced : set_.reltol;
            if ((-cx > 0. || -by - hz >= -abstol) && pres < feastol && dres < feastol &&
                (gap < abstol || (relgap && *relgap < reltol)))
                return reduced ? Status::near_optimal : Status::optimal;
            if (pinfres && *pinfres < feastol && tau < kap)
                return Status::primal_infeasible;
            if (dinfres && *dinfres < feastol && tau < kap)
                return Status::dual_infeasible;
            return std::nullopt;
        };

        if (auto st = converged(false))
            return finish(*st, iter);

        if (iter == set_.max_iterations || !std::isfinite(mu))
        {
            if (auto st = converged(true))
                return finish(*st, iter);
            return finish(std::isfinite(mu) ? Status::max_iterations : Status::numerical_limits, iter);
        }

        if (!update_scaling(lay_, s, z, w_))
        {
            if (auto st = converged(true))
                return finish(*st, iter);
            return finish(Status::numerical_limits, iter);
        }

        assemble_kkt(false);
        factorize();

        solve_kkt(rhs1, dx1, dy1, dz1, false);

        // Affine (predictor) direction.
        rhs2.head(n_) = rx;
        rhs2.segment(n_, me_) = -ry;
        rhs2.tail(m_) = s - rz;
        solve_kkt(rhs2, dx2, dy2, dz2, false);

        const double dtau_denom = kap / tau - p_.c.dot(dx1) - (me_ > 0 ? p_.b.dot(dy1) : 0.) - p_.h.dot(dz1);
        const double dtau_aff =
            (rt - kap + p_.c.dot(dx2) + (me_ > 0 ? p_.b.dot(dy2) : 0.) + p_.h.dot(dz2)) / dtau_denom;

        dz2 += dtau_aff * dz1;
        w_.multiply(lay_, dz2, w_dz);
        ds_by_w = -w_dz - w_.lambda;
        const double dkap_aff = -kap - kap / tau * dtau_aff;

        const double step_aff = line_search(lay_, w_.lambda, ds_by_w, w_dz, tau, dtau_aff, kap, dkap_aff);
        const double sigma = std::clamp(std::pow(1. - step_aff, 3), 1e-4, 0.9999);

        // Combined (corrector) direction.
        conic_product(lay_, w_.lambda, w_.lambda, ds1);
        conic_product(lay_, ds_by_w, w_dz, ds2);
        const double sigmamu = sigma * mu;
        ds1 += ds2;
        ds1.head(lay_.n_pos).array() -= sigmamu;
        for (std::size_t i = 0; i < lay_.soc_start.size(); i++)
            ds1(lay_.soc_start[i]) -= sigmamu;

        conic_division(lay_, w_.lambda, ds1, tmp);  // tmp = lambda \ ds
        w_.multiply(lay_, tmp, ds1);                // ds1 = W (lambda \ ds)

        const double one_minus_sigma = 1. - sigma;
        rhs2.head(n_) = one_minus_sigma * rx;
        rhs2.segment(n_, me_) = -one_minus_sigma * ry;
        rhs2.tail(m_) = -one_minus_sigma * rz + ds1;
        solve_kkt(rhs2, dx2, dy2, dz2, false);

        const double bkap = kap * tau + dkap_aff * dtau_aff - sigmamu;
        const double dtau = (one_minus_sigma * rt - bkap / tau + p_.c.dot(dx2) +
                             (me_ > 0 ? p_.b.dot(dy2) : 0.) + p_.h.dot(dz2)) /
                            dtau_denom;

        dx2 += dtau * dx1;
        dy2 += dtau * dy1;
        dz2 += dtau * dz1;

        w_.multiply(lay_, dz2, w_dz);
        ds_by_w = -(tmp + w_dz);
        const double dkap = -(bkap + kap * dtau) / tau;

        const double step =
            set_.step_damping * line_search(lay_, w_.lambda, ds_by_w, w_dz, tau, dtau, kap, dkap);
        if (!std::isfinite(step) || step <= 1e-13)
        {
            if (auto st = converged(true))
                return finish(*st, iter);
            return finish(Status::numerical_limits, iter);
        }

        w_.multiply(lay_, ds_by_w, ds);

        x += step * dx2;
        y += step * dy2;
        z += step * dz2;
        s += step * ds;
        kap += step * dkap;
        tau += step * dtau;
    }

    return finish(Status::max_iterations, set_.max_iterations);
}

} // namespace

Solution solve(const Problem &prob, const Settings &settings)
{
    prob.validate();
    Ipm ipm(prob, settings);
    return ipm.run();
}

} // namespace dam::socp
