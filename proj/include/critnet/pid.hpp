#pragma once

#include <iosfwd>
#include <vector>

namespace critnet {

/// Dense joint distribution p(t, s1, s2) with small alphabets
/// (target typically binary, sources packed l-histories up to 16 states).
struct JointDistribution {
    int nt = 2;
    int n1 = 2;
    int n2 = 2;
    std::vector<double> p; // index (t*n1 + s1)*n2 + s2

    double& at(int t, int s1, int s2) { return p[(t * n1 + s1) * n2 + s2]; }
    double at(int t, int s1, int s2) const {
        return p[(t * n1 + s1) * n2 + s2];
    }
    void validate() const; // nonnegative, sums to 1
};

/// Empirical joint of (target(t), packed l-past of src1, packed l-past of
/// src2) over aligned binarized series.
JointDistribution estimate_joint(const std::vector<int>& target,
                                 const std::vector<int>& src1,
                                 const std::vector<int>& src2, int l);

struct PIDResult {
    double unq1 = 0.0;
    double unq2 = 0.0;
    double shd = 0.0;
    double syn = 0.0;
    double joint_mi = 0.0;
    int iterations = 0;
    double improvement = 0.0; // last objective decrease, bits
};

/// BROJA decomposition: minimizes I_Q(T;S1,S2) over all Q matching both
/// pairwise marginals Q(t,s1)=P(t,s1) and Q(t,s2)=P(t,s2), by mirror
/// descent (exponentiated gradient) with Sinkhorn re-projection onto the
/// per-t transportation polytopes. Stops when the objective improves by
/// less than 1e-10 bits per iteration; errors out after 1e5 iterations.
PIDResult broja_pid(const JointDistribution& p);

/// Plain-text table, one `t s1 s2 prob` row per line. '#' comments allowed.
JointDistribution read_joint_table(std::istream& is);
void write_joint_table(std::ostream& os, const JointDistribution& p);

} // namespace critnet
