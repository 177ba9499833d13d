#pragma once

#include <cstdint>
#include <vector>

namespace chfh {

/// One output time of a trajectory. The first ten fields form the CSV schema.
struct LedgerRow {
    double t = 0.0;
    double mass = 0.0;
    double E = 0.0;
    double E0 = 0.0;
    double grad_mu_sq = 0.0;   ///< ||grad_h mu||^2
    double Lambda = 0.0;       ///< sum over faces of b(phi) |grad_h mu|^2
    double B = 1.0;            ///< 1 + Lambda
    double sep = 1.0;          ///< min over cells of 1 - |phi|
    double mu_bar = 0.0;
    double cum_dissipation = 0.0;

    // In-memory only.
    double dt = 0.0;
    int newton_iters = 0;
    int linear_iters = 0;
    double hm1_increment = 0.0; ///< ||grad G (phi_n - phi_{n-1})||
    bool clamped = false;
};

struct RunLedger {
    std::vector<LedgerRow> rows;
    std::uint64_t seed = 0;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    const LedgerRow& front() const { return rows.front(); }
    const LedgerRow& back() const { return rows.back(); }
};

} // namespace chfh
