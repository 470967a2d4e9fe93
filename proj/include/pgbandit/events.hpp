#pragma once

#include <cstdint>
#include <string_view>

#include "pgbandit/diagnostics.hpp"
#include "pgbandit/error.hpp"
#include "pgbandit/sim.hpp"

namespace pgbandit {

enum class EventKind {
    MinLogitBreach,    // min_t min_c θ_{t,c} ≤ -ln(n/δ); ceiling k δ
    PairMarginBreach,  // min_t pair_margin_t ≤ -1;        ceiling k*(k-k*) δ
    GoodEventBreach,   // τ < n;                           ceiling δ (k*(k-k*) + k)
};

constexpr std::string_view to_string(EventKind e) {
    switch (e) {
        case EventKind::MinLogitBreach: return "min_logit_breach";
        case EventKind::PairMarginBreach: return "pair_margin_breach";
        case EventKind::GoodEventBreach: return "g_breach";
    }
    return "unknown";
}

struct FrequencyEstimate {
    EventKind event{};
    std::uint64_t count = 0;
    std::uint64_t runs = 0;
    double estimate = 0.0;
    WilsonInterval interval;
    double ceiling = 0.0;
    // Passes when the Wilson lower end does not exceed the union-bound ceiling.
    bool pass = false;
};

inline bool event_occurred(const RunSummary& r, EventKind e, const AnalysisParams& p) {
    switch (e) {
        case EventKind::MinLogitBreach: return r.min_min_logit <= -p.log_term;
        case EventKind::PairMarginBreach: return r.min_pair_margin <= -1.0;
        case EventKind::GoodEventBreach: return r.tau < p.n;
    }
    return false;
}

inline double event_ceiling(EventKind e, const AnalysisParams& p) {
    const double k = static_cast<double>(p.k);
    const double ks = static_cast<double>(p.k_star);
    switch (e) {
        case EventKind::MinLogitBreach: return k * p.delta;
        case EventKind::PairMarginBreach: return ks * (k - ks) * p.delta;
        case EventKind::GoodEventBreach: return p.delta * (ks * (k - ks) + k);
    }
    return 0.0;
}

inline FrequencyEstimate event_frequency(const BatchResult& batch, EventKind e) {
    if (batch.runs.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
    FrequencyEstimate f;
    f.event = e;
    f.runs = batch.runs.size();
    for (const auto& r : batch.runs)
        if (event_occurred(r, e, batch.params)) ++f.count;
    f.estimate = static_cast<double>(f.count) / static_cast<double>(f.runs);
    f.interval = wilson_interval(f.count, f.runs);
    f.ceiling = event_ceiling(e, batch.params);
    f.pass = f.interval.lo <= f.ceiling;
    return f;
}

}  // namespace pgbandit
