#pragma once

#include <string>

#include "ahmpc/cloop.hpp"

namespace ahmpc {

/// CSV schema: n,t,x0..x{d-1},u0..u{m-1},N,alpha,V,l,inner_iters,ocp_solves,
/// wall_ms. Floats printed with 17 significant digits so re-parsing is
/// numerically exact; practical-skip steps print alpha as `skip`.
void emit_trace_csv(const ClosedLoopTrace& trace, const std::string& path);

/// Inverse of emit_trace_csv (config and v_next fields are not stored in the
/// CSV and stay default-constructed).
ClosedLoopTrace parse_trace_csv(const std::string& path);

/// Two-column gnuplot data: n N_n.
void emit_horizons_dat(const ClosedLoopTrace& trace, const std::string& path);

/// Two-column gnuplot data: n alpha_n (practical-skip steps omitted).
void emit_alphas_dat(const ClosedLoopTrace& trace, const std::string& path);

}  // namespace ahmpc
