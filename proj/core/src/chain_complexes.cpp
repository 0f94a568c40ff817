#include "mbcascade/chain_complexes.hpp"

#include "mbcascade/orientation.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace mbcascade {

const char* to_string(Ring r) { return r == Ring::Z ? "Z" : "Z2"; }

int HomologyResult::euler_characteristic() const {
    int e = 0;
    for (size_t k = 0; k < betti.size(); ++k) e += (k % 2 == 0 ? 1 : -1) * betti[k];
    return e;
}

// ---- Smith normal form ------------------------------------------------------------

SmithForm smith_normal_form(const IntMatrix& A) {
    IntMatrix D = A;
    const Eigen::Index m = D.rows(), n = D.cols();
    SmithForm out;
    for (Eigen::Index t = 0; t < std::min(m, n); ++t) {
        for (;;) {
            // smallest nonzero pivot in the trailing block
            Eigen::Index pi = -1, pj = -1;
            long long best = 0;
            for (Eigen::Index i = t; i < m; ++i)
                for (Eigen::Index j = t; j < n; ++j) {
                    const long long v = std::llabs(D(i, j));
                    if (v != 0 && (best == 0 || v < best)) {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            if (pi < 0) break;
            D.row(t).swap(D.row(pi));
            D.col(t).swap(D.col(pj));
            const long long p = D(t, t);
            bool clean = true;
            for (Eigen::Index i = t + 1; i < m; ++i) {
                const long long q = D(i, t) / p;
                if (q != 0) D.row(i) -= q * D.row(t);
                if (D(i, t) != 0) clean = false;
            }
            for (Eigen::Index j = t + 1; j < n; ++j) {
                const long long q = D(t, j) / p;
                if (q != 0) D.col(j) -= q * D.col(t);
                if (D(t, j) != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility of the trailing block by the pivot
            Eigen::Index bad = -1;
            for (Eigen::Index i = t + 1; i < m && bad < 0; ++i)
                for (Eigen::Index j = t + 1; j < n; ++j)
                    if (D(i, j) % p != 0) {
                        bad = i;
                        break;
                    }
            if (bad < 0) break;
            D.row(t) += D.row(bad);
        }
        if (D(t, t) == 0) break;
        out.diagonal.push_back(std::llabs(D(t, t)));
    }
    out.rank = static_cast<int>(out.diagonal.size());
    return out;
}

int rank_mod2(const IntMatrix& A) {
    std::vector<std::vector<int>> M(A.rows(), std::vector<int>(A.cols()));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) M[i][j] = static_cast<int>(((A(i, j) % 2) + 2) % 2);
    int rank = 0;
    const int rows = static_cast<int>(A.rows()), cols = static_cast<int>(A.cols());
    for (int c = 0; c < cols && rank < rows; ++c) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (M[r][c]) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(M[rank], M[piv]);
        for (int r = 0; r < rows; ++r)
            if (r != rank && M[r][c])
                for (int k = c; k < cols; ++k) M[r][k] ^= M[rank][k];
        ++rank;
    }
    return rank;
}

// ---- complexes ----------------------------------------------------------------------

std::vector<std::pair<int, int>> adjacent_pairs(const MorseBottScenario& sc) {
    std::vector<std::pair<int, int>> out;
    for (int k = 1; k <= sc.max_degree(); ++k)
        for (int q : sc.generators_of_degree(k))
            for (int p : sc.generators_of_degree(k - 1)) out.emplace_back(q, p);
    return out;
}

void verify_d_squared(const GradedComplex& c) {
    for (size_t k = 2; k < c.boundary.size(); ++k) {
        IntMatrix dd = c.boundary[k - 1] * c.boundary[k];
        for (Eigen::Index j = 0; j < dd.cols(); ++j)
            for (Eigen::Index i = 0; i < dd.rows(); ++i) {
                long long v = dd(i, j);
                if (c.ring == Ring::Z2) v = ((v % 2) + 2) % 2;
                if (v != 0) {
                    std::ostringstream os;
                    os << "d o d nonzero in degree " << k << ", column " << j << " (generator "
                       << c.generators[k][j] << ")";
                    throw DSquaredNonzero(static_cast<int>(k), static_cast<int>(j), os.str());
                }
            }
    }
}

GradedComplex assemble(const MorseBottScenario& sc, const CountTable& counts, Ring ring) {
    GradedComplex c;
    c.ring = ring;
    const int top = sc.max_degree();
    for (int k = 0; k <= top; ++k) c.generators.push_back(sc.generators_of_degree(k));
    c.boundary.push_back(IntMatrix::Zero(0, static_cast<Eigen::Index>(c.generators[0].size())));
    for (int k = 1; k <= top; ++k) {
        const auto& cols = c.generators[k];
        const auto& rows = c.generators[k - 1];
        IntMatrix B = IntMatrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (size_t j = 0; j < cols.size(); ++j)
            for (size_t i = 0; i < rows.size(); ++i) {
                const auto it = counts.find({cols[j], rows[i]});
                if (it == counts.end()) continue;
                long long v = it->second;
                if (ring == Ring::Z2) v = ((v % 2) + 2) % 2;
                B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            }
        c.boundary.push_back(std::move(B));
    }
    verify_d_squared(c);
    return c;
}

HomologyResult homology(const GradedComplex& c) {
    HomologyResult h;
    const size_t top = c.generators.size();
    std::vector<int> rank(top + 1, 0);
    std::vector<std::vector<long long>> factors(top + 1);
    for (size_t k = 1; k < top; ++k) {
        if (c.ring == Ring::Z2) {
            rank[k] = rank_mod2(c.boundary[k]);
        } else {
            const SmithForm s = smith_normal_form(c.boundary[k]);
            rank[k] = s.rank;
            factors[k] = s.diagonal;
        }
    }
    for (size_t k = 0; k < top; ++k) {
        h.betti.push_back(static_cast<int>(c.generators[k].size()) - rank[k] - rank[k + 1]);
        std::vector<long long> tor;
        for (long long d : factors[k + 1])
            if (d > 1) tor.push_back(d);
        h.torsion.push_back(tor);
    }
    return h;
}

// ---- gradient lines of h ----------------------------------------------------------

HFlowEnumeration h_flow_lines(const PerturbationData& pd, int q, int p, const CascadeSettings& cfg) {
    const MorseBottScenario& sc = *pd.scenario;
    const AuxCriticalPoint& gq = sc.point(q);
    const AuxCriticalPoint& gp = sc.point(p);
    if (gq.total_index - gp.total_index != 1 && !cfg.allow_index_gap)
        throw std::invalid_argument("h_flow_lines needs a total index drop of one");
    HFlowEnumeration out;
    out.q = q;
    out.p = p;
    out.epsilon = pd.epsilon;

    FlowContext ctx(sc, pd.h_eps);
    if (sc.host_of(q).kind == SubmanifoldKind::Point) ctx.source_submanifold = gq.host;
    ctx.ode = cfg.ode;
    ctx.capture = cfg.capture;
    const auto target = [p](const Landing& L) { return L.destination == p; };
    ShootSettings ss;
    ss.samples = cfg.samples;
    ss.bisection_tol = cfg.bisection_tol;

    for (const SeedFamily& fam : morse_seed_families(sc, pd.h_eps, q, cfg.delta)) {
        const ShootOutcome o = shoot_with_refinement(ctx, fam, target, ss, cfg.max_doublings);
        out.integrations += o.integrations;
        for (const std::string& n : o.notes) out.notes.push_back(fam.label + ": " + n);
        if (o.continuum) {
            std::ostringstream os;
            os << "open family of gradient lines of h from " << gq.label << " to " << gp.label;
            throw ContinuumDetected(os.str());
        }
        if (o.spurious > 0)
            out.notes.push_back(fam.label + ": " + std::to_string(o.spurious) + " class changes without a separatrix");
        for (const ShootResult& r : o.results) {
            if (!landing_confirmed(ctx, r.trajectory)) {
                std::ostringstream os;
                os << fam.label << ": landing at parameter " << r.parameter << " changes past the capture tube";
                out.notes.push_back(os.str());
            }
            const CompletedPath path = complete_path(ctx, r, cfg.resolution, gq.host, cfg.delta);
            HFlowLine l;
            l.q = q;
            l.p = p;
            l.parameter = r.parameter;
            l.family = fam.label;
            l.landing = r.landing;
            l.trajectory = r.trajectory;
            l.polyline = path.polyline;
            l.time_vector.assign(sc.submanifolds.size(), 0.0);
            const auto& P = r.trajectory.points;
            const auto& T = r.trajectory.times;
            for (size_t k = 0; k < pd.tubes.size(); ++k) {
                const int j = pd.tubes[k].host;
                if (j == gq.host || j == gp.host) continue;
                double inside = 0.0;
                for (size_t i = 0; i + 1 < P.size(); ++i)
                    if (sc.submanifolds[j].normal_distance(P[i]) < pd.tubes[k].inner_radius)
                        inside += T[i + 1] - T[i];
                l.time_vector[j] = pd.epsilon * inside;
            }
            if (gq.total_index - gp.total_index == 1) l.sign = flow_line_sign(sc, q, p, l.polyline);
            out.signed_count += l.sign;
            out.lines.push_back(std::move(l));
        }
    }
    return out;
}

long long signed_count_h_eps(const PerturbationData& pd, int q, int p, const CascadeSettings& cfg) {
    return h_flow_lines(pd, q, p, cfg).signed_count;
}

int cascade_count_z2(const MorseBottScenario& sc, int q, int p, const CascadeSettings& cfg) {
    return static_cast<int>(enumerate_cascades(sc, q, p, cfg).cascades.size() % 2);
}

long long cascade_count_z(const std::vector<std::optional<int>>& cascade_signs) {
    long long s = 0;
    for (size_t i = 0; i < cascade_signs.size(); ++i) {
        if (!cascade_signs[i]) throw MatchIncomplete("cascade " + std::to_string(i) + " has no matched flow line");
        s += *cascade_signs[i];
    }
    return s;
}

}  // namespace mbcascade
