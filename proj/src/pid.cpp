#include "critnet/pid.hpp"

#include "critnet/info.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace critnet {

namespace {

constexpr double k_ln2 = 0.6931471805599453;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

struct Marginals {
    std::vector<double> pt;    // P(t)
    std::vector<double> pts1;  // P(t,s1)
    std::vector<double> pts2;  // P(t,s2)
    std::vector<double> ps1;   // P(s1)
    std::vector<double> ps2;   // P(s2)
};

Marginals marginals_of(const JointDistribution& d) {
    Marginals m;
    m.pt.assign(d.nt, 0.0);
    m.pts1.assign(d.nt * d.n1, 0.0);
    m.pts2.assign(d.nt * d.n2, 0.0);
    m.ps1.assign(d.n1, 0.0);
    m.ps2.assign(d.n2, 0.0);
    for (int t = 0; t < d.nt; ++t)
        for (int a = 0; a < d.n1; ++a)
            for (int b = 0; b < d.n2; ++b) {
                const double v = d.at(t, a, b);
                m.pt[t] += v;
                m.pts1[t * d.n1 + a] += v;
                m.pts2[t * d.n2 + b] += v;
                m.ps1[a] += v;
                m.ps2[b] += v;
            }
    return m;
}

// I(T;S1,S2) in nats for a distribution sharing P's t-marginal.
double joint_mi_nats(const JointDistribution& q, const std::vector<double>& pt) {
    // sum q log q - sum_{ab} q_ab log q_ab - sum_t p_t log p_t
    double h_joint = 0.0;
    std::vector<double> qab(q.n1 * q.n2, 0.0);
    for (int t = 0; t < q.nt; ++t)
        for (int a = 0; a < q.n1; ++a)
            for (int b = 0; b < q.n2; ++b) {
                const double v = q.at(t, a, b);
                h_joint += xlogx(v);
                qab[a * q.n2 + b] += v;
            }
    double h_ab = 0.0;
    for (double v : qab) h_ab += xlogx(v);
    double h_t = 0.0;
    for (double v : pt) h_t += xlogx(v);
    return h_joint - h_ab - h_t;
}

double pair_mi_bits(const std::vector<double>& pts, const std::vector<double>& pt,
                    const std::vector<double>& ps, int nt, int ns) {
    double mi = 0.0;
    for (int t = 0; t < nt; ++t)
        for (int s = 0; s < ns; ++s) {
            const double v = pts[t * ns + s];
            if (v <= 0.0) continue;
            mi += v * std::log(v / (pt[t] * ps[s]));
        }
    return mi / k_ln2;
}

// Sinkhorn/IPF projection of block t onto row sums pts1(t,.) over b and
// column sums pts2(t,.) over a.
void project_block(JointDistribution& q, int t, const Marginals& m) {
    const int n1 = q.n1, n2 = q.n2;
    for (int it = 0; it < 1000; ++it) {
        double worst = 0.0;
        for (int a = 0; a < n1; ++a) {
            double row = 0.0;
            for (int b = 0; b < n2; ++b) row += q.at(t, a, b);
            const double want = m.pts1[t * n1 + a];
            if (row > 0.0) {
                const double f = want / row;
                for (int b = 0; b < n2; ++b) q.at(t, a, b) *= f;
                worst = std::max(worst, std::abs(row - want));
            }
        }
        for (int b = 0; b < n2; ++b) {
            double col = 0.0;
            for (int a = 0; a < n1; ++a) col += q.at(t, a, b);
            const double want = m.pts2[t * n2 + b];
            if (col > 0.0) {
                const double f = want / col;
                for (int a = 0; a < n1; ++a) q.at(t, a, b) *= f;
                worst = std::max(worst, std::abs(col - want));
            }
        }
        if (worst < 1e-14) break;
    }
}

} // namespace

void JointDistribution::validate() const {
    if (nt < 1 || n1 < 1 || n2 < 1 ||
        p.size() != std::size_t(nt) * n1 * n2)
        throw std::invalid_argument("JointDistribution: bad shape");
    double sum = 0.0;
    for (double v : p) {
        if (v < -1e-12)
            throw std::invalid_argument("JointDistribution: negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("JointDistribution: does not sum to 1");
}

JointDistribution estimate_joint(const std::vector<int>& target,
                                 const std::vector<int>& src1,
                                 const std::vector<int>& src2, int l) {
    if (target.size() != src1.size() || target.size() != src2.size())
        throw std::invalid_argument("estimate_joint: length mismatch");
    auto e1 = embed_past(src1, l);
    auto e2 = embed_past(src2, l);
    const std::size_t n = e1.past.size();
    if (n == 0) throw std::invalid_argument("estimate_joint: too few samples");

    JointDistribution d;
    d.nt = 2;
    d.n1 = 1 << l;
    d.n2 = 1 << l;
    d.p.assign(std::size_t(d.nt) * d.n1 * d.n2, 0.0);
    const double w = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int t = target[i + l] ? 1 : 0;
        d.at(t, e1.past[i], e2.past[i]) += w;
    }
    return d;
}

PIDResult broja_pid(const JointDistribution& p) {
    p.validate();
    const Marginals m = marginals_of(p);

    // Initialize with the per-t independent coupling, which satisfies both
    // pairwise marginal constraints exactly.
    JointDistribution q = p;
    for (int t = 0; t < p.nt; ++t)
        for (int a = 0; a < p.n1; ++a)
            for (int b = 0; b < p.n2; ++b)
                q.at(t, a, b) =
                    m.pt[t] > 0.0
                        ? m.pts1[t * p.n1 + a] * m.pts2[t * p.n2 + b] / m.pt[t]
                        : 0.0;

    std::vector<double> qab(p.n1 * p.n2, 0.0);
    auto recompute_qab = [&]() {
        std::fill(qab.begin(), qab.end(), 0.0);
        for (int t = 0; t < p.nt; ++t)
            for (int a = 0; a < p.n1; ++a)
                for (int b = 0; b < p.n2; ++b)
                    qab[a * p.n2 + b] += q.at(t, a, b);
    };
    recompute_qab();

    double obj = joint_mi_nats(q, m.pt);
    double eta = 0.5;
    double last_improve = 0.0;
    int iter = 0;
    const int max_iter = 100'000;
    JointDistribution trial = q;
    for (; iter < max_iter; ++iter) {
        trial.p = q.p;
        for (int t = 0; t < p.nt; ++t) {
            for (int a = 0; a < p.n1; ++a)
                for (int b = 0; b < p.n2; ++b) {
                    const double v = q.at(t, a, b);
                    if (v <= 0.0) continue;
                    const double denom = qab[a * p.n2 + b] * m.pt[t];
                    const double g = std::log(v / denom);
                    trial.at(t, a, b) = v * std::exp(-eta * g);
                }
            project_block(trial, t, m);
        }
        JointDistribution saved_q = q;
        q.p = trial.p;
        recompute_qab();
        const double new_obj = joint_mi_nats(q, m.pt);
        if (new_obj <= obj) {
            last_improve = (obj - new_obj) / k_ln2;
            obj = new_obj;
            eta = std::min(eta * 1.05, 2.0);
            if (last_improve < 1e-10) break;
        } else {
            q.p = saved_q.p;
            recompute_qab();
            eta *= 0.5;
            if (eta < 1e-12) break;
        }
    }
    if (iter >= max_iter)
        throw std::runtime_error("broja_pid: no convergence in 1e5 iterations");

    PIDResult r;
    r.iterations = iter + 1;
    r.improvement = last_improve;

    const double i_p_joint = joint_mi_nats(p, m.pt) / k_ln2;
    const double i_q_joint = obj / k_ln2;
    const double i_ts1 = pair_mi_bits(m.pts1, m.pt, m.ps1, p.nt, p.n1);
    const double i_ts2 = pair_mi_bits(m.pts2, m.pt, m.ps2, p.nt, p.n2);

    // I_Q(T;S1|S2) = I_Q(T;S1,S2) - I_Q(T;S2); pairwise marginals of Q
    // match P, so I_Q(T;S2) = I_P(T;S2).
    r.unq1 = i_q_joint - i_ts2;
    r.unq2 = i_q_joint - i_ts1;
    r.shd = i_ts1 - r.unq1;
    r.syn = i_p_joint - i_q_joint;
    r.joint_mi = i_p_joint;
    return r;
}

JointDistribution read_joint_table(std::istream& is) {
    struct Row {
        int t, s1, s2;
        double prob;
    };
    std::vector<Row> rows;
    int max_t = 0, max_1 = 0, max_2 = 0;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Row r{};
        if (!(ls >> r.t >> r.s1 >> r.s2 >> r.prob)) continue;
        if (r.t < 0 || r.s1 < 0 || r.s2 < 0)
            throw std::invalid_argument("joint table: negative index");
        rows.push_back(r);
        max_t = std::max(max_t, r.t);
        max_1 = std::max(max_1, r.s1);
        max_2 = std::max(max_2, r.s2);
    }
    if (rows.empty()) throw std::invalid_argument("joint table: empty");
    JointDistribution d;
    d.nt = max_t + 1;
    d.n1 = max_1 + 1;
    d.n2 = max_2 + 1;
    d.p.assign(std::size_t(d.nt) * d.n1 * d.n2, 0.0);
    for (const auto& r : rows) d.at(r.t, r.s1, r.s2) += r.prob;
    d.validate();
    return d;
}

void write_joint_table(std::ostream& os, const JointDistribution& d) {
    os << "# t s1 s2 prob\n";
    for (int t = 0; t < d.nt; ++t)
        for (int a = 0; a < d.n1; ++a)
            for (int b = 0; b < d.n2; ++b)
                if (d.at(t, a, b) > 0.0)
                    os << t << ' ' << a << ' ' << b << ' ' << d.at(t, a, b)
                       << '\n';
}

} // namespace critnet
