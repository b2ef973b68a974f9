#pragma once

#include <vector>

namespace critnet {

/// Plug-in (maximum-likelihood) discrete information estimators in bits.
/// Series are small non-negative integers (binarized activity or packed
/// history states). No bias correction is applied; the memory-capacity
/// definition's own subtraction is the only bias handling.

/// Shannon entropy of the empirical distribution.
double entropy(const std::vector<int>& series);

/// Joint entropy of aligned columns.
double joint_entropy(const std::vector<const std::vector<int>*>& columns);

/// I(X;Y) over aligned samples.
double mutual_information(const std::vector<int>& x,
                          const std::vector<int>& y);

/// Packs l consecutive past bins of a binary series: state(t) encodes
/// x(t-l..t-1), valid for t in [l, n). Output is aligned with the input
/// (index t corresponds to input index t); the first l entries are dropped
/// by the callers via the companion current-value slice.
struct Embedding {
    std::vector<int> current; // x(t) for t in [l, n)
    std::vector<int> past;    // packed x(t-l..t-1), same alignment
};
Embedding embed_past(const std::vector<int>& x, int l);

/// Active information storage AIS(X) = I(X(t) : X^-(t)).
double active_information_storage(const std::vector<int>& x, int l);

/// Transfer entropy TE(src -> tgt) = I(tgt(t) : src^- | tgt^-).
double transfer_entropy(const std::vector<int>& src,
                        const std::vector<int>& tgt, int l);

/// Joint mutual information I(tgt(t) : tgt^-, src^-); equals
/// AIS(tgt) + TE(src->tgt) exactly under plug-in estimation.
double joint_history_mi(const std::vector<int>& src,
                        const std::vector<int>& tgt, int l);

/// Lagged MI I_tau(X:Y) = I(X(t) : Y(t+tau)), tau >= 0.
double lagged_mi(const std::vector<int>& x, const std::vector<int>& y,
                 int tau);

/// Memory capacity MC = sum_{tau=1}^{N_tau} dt * (I_tau - I_{N_tau}),
/// in bits*ms.
double memory_capacity(const std::vector<int>& x, const std::vector<int>& y,
                       int n_tau, double dt_bin);

} // namespace critnet
