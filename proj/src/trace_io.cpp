#include "ahmpc/trace_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ahmpc {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(what + ": " + path);
}

}  // namespace

void emit_trace_csv(const ClosedLoopTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open trace output");
  const int d = trace.steps.empty() ? 0 : static_cast<int>(trace.steps.front().x.size());
  const int m = trace.steps.empty() ? 0 : static_cast<int>(trace.steps.front().u.size());
  out << "n,t";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  for (int i = 0; i < m; ++i) out << ",u" << i;
  out << ",N,alpha,V,l,inner_iters,ocp_solves,wall_ms\n";
  for (const TraceStep& s : trace.steps) {
    out << s.n << ',' << fmt(s.t);
    for (int i = 0; i < d; ++i) out << ',' << fmt(s.x(i));
    for (int i = 0; i < m; ++i) out << ',' << fmt(s.u(i));
    out << ',' << s.N << ',';
    if (s.skip) {
      out << "skip";
    } else {
      out << fmt(s.alpha);
    }
    out << ',' << fmt(s.value) << ',' << fmt(s.stage) << ','
        << s.inner_iterations << ',' << s.ocp_solves << ',' << fmt(s.wall_ms)
        << '\n';
  }
  if (!out) io_fail(path, "write failure");
}

ClosedLoopTrace parse_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open trace input");
  std::string header;
  if (!std::getline(in, header)) io_fail(path, "empty trace file");

  // Count state/control columns from the header.
  int d = 0, m = 0;
  {
    std::istringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.size() > 1 && col[0] == 'x' && std::isdigit(col[1])) ++d;
      if (col.size() > 1 && col[0] == 'u' && std::isdigit(col[1])) ++m;
    }
  }

  ClosedLoopTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    auto next = [&]() -> std::string {
      if (!std::getline(ls, cell, ',')) io_fail(path, "short trace row");
      return cell;
    };
    TraceStep s;
    s.n = std::stoi(next());
    s.t = std::stod(next());
    s.x.resize(d);
    for (int i = 0; i < d; ++i) s.x(i) = std::stod(next());
    s.u.resize(m);
    for (int i = 0; i < m; ++i) s.u(i) = std::stod(next());
    s.N = std::stoi(next());
    const std::string alpha = next();
    if (alpha == "skip") {
      s.skip = true;
      s.alpha = 0.0;
    } else {
      s.alpha = std::stod(alpha);
    }
    s.value = std::stod(next());
    s.stage = std::stod(next());
    s.inner_iterations = std::stoi(next());
    s.ocp_solves = std::stoi(next());
    s.wall_ms = std::stod(next());
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

void emit_horizons_dat(const ClosedLoopTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open output");
  for (const TraceStep& s : trace.steps) out << s.n << ' ' << s.N << '\n';
  if (!out) io_fail(path, "write failure");
}

void emit_alphas_dat(const ClosedLoopTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open output");
  for (const TraceStep& s : trace.steps) {
    if (!s.skip) out << s.n << ' ' << fmt(s.alpha) << '\n';
  }
  if (!out) io_fail(path, "write failure");
}

}  // namespace ahmpc
