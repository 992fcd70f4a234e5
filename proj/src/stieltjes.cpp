#include "spectra/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spectra {

namespace {

constexpr double kPoleGuard = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;

void require_valid(const FFunction& F) {
  if (F.bulk.atoms.empty() || F.bulk.M <= 0)
    throw Error(Code::precondition, "f: empty bulk spectrum");
  if (!(F.c_N > 0.0) || !std::isfinite(F.c_N))
    throw Error(Code::precondition, "f: invalid aspect ratio");
}

void check_pole_real(const FFunction& F, double x) {
  if (std::fabs(x) <= kPoleGuard)
    throw Error(Code::domain, "f: x within 1e-14 of the pole at 0");
  for (const auto& a : F.bulk.atoms) {
    const double p = -1.0 / a.sigma;
    if (std::fabs(x - p) <= kPoleGuard)
      throw Error(Code::domain,
                  "f: x within 1e-14 of the pole at " + std::to_string(p));
  }
}

void check_pole_complex(const FFunction& F, std::complex<double> x) {
  if (std::abs(x) <= kPoleGuard)
    throw Error(Code::domain, "f: x within 1e-14 of the pole at 0");
  for (const auto& a : F.bulk.atoms) {
    const double p = -1.0 / a.sigma;
    if (std::abs(x - p) <= kPoleGuard)
      throw Error(Code::domain,
                  "f: x within 1e-14 of the pole at " + std::to_string(p));
  }
}

// phi(t) = 1 - (1/c) sum_i w_i / (1 + t/sigma_i), squared denominator.
// Equals x^2 f'(x) at t = 1/x; smooth through t = 0 with phi(0) = 1 - 1/c.
double phi(const FFunction& F, double t) {
  double s = 0.0;
  for (int i = 0; i < F.q(); ++i) {
    const double d = 1.0 + t / F.bulk.atoms[i].sigma;
    s += F.bulk.weight(i) / (d * d);
  }
  return 1.0 - s / F.c_N;
}

// plain bisection for a continuous g with g(lo) <= 0 <= g(hi)
template <class G>
double bisect(G&& g, double lo, double hi, const char* who) {
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (!(glo < 0.0 && ghi > 0.0))
    throw Error(Code::structure, std::string(who) + ": lost the sign bracket");
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (gm < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max({std::fabs(lo), std::fabs(hi), 1e-3}))
      break;
  }
  return 0.5 * (lo + hi);
}

std::vector<int> counts_from_masses(const std::vector<double>& masses, int N, int M) {
  const int total = std::min(M, N);
  const int p = static_cast<int>(masses.size());
  std::vector<int> counts(p, 0);
  std::vector<std::pair<double, int>> rem(p);
  int assigned = 0;
  for (int k = 0; k < p; ++k) {
    const double v = N * masses[k];
    counts[k] = static_cast<int>(std::floor(v + 1e-12));
    assigned += counts[k];
    rem[k] = {v - counts[k], k};
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (int i = 0; assigned < total && i < p; ++i, ++assigned) ++counts[rem[i].second];
  while (assigned > total) {  // guard against floor slop
    for (int k = p - 1; k >= 0 && assigned > total; --k)
      if (counts[k] > 0) {
        --counts[k];
        --assigned;
      }
  }
  return counts;
}

}  // namespace

FFunction make_f_function(const BulkSpectrum& bulk, double c_N, int N) {
  FFunction F;
  F.bulk = bulk;
  F.c_N = c_N;
  F.N = N > 0 ? N : static_cast<int>(std::lround(c_N * bulk.M));
  require_valid(F);
  return F;
}

FFunction make_f_function(const PopulationModel& model) {
  return make_f_function(model.bulk, model.c_N, model.N);
}

double f_eval(const FFunction& F, double x) {
  require_valid(F);
  check_pole_real(F, x);
  double s = 0.0;
  for (int i = 0; i < F.q(); ++i)
    s += F.bulk.weight(i) / (x + 1.0 / F.bulk.atoms[i].sigma);
  return -1.0 / x + s / F.c_N;
}

std::complex<double> f_eval(const FFunction& F, std::complex<double> x) {
  require_valid(F);
  check_pole_complex(F, x);
  std::complex<double> s = 0.0;
  for (int i = 0; i < F.q(); ++i)
    s += F.bulk.weight(i) / (x + 1.0 / F.bulk.atoms[i].sigma);
  return -1.0 / x + s / F.c_N;
}

double f_derivative(const FFunction& F, double x, int order) {
  require_valid(F);
  check_pole_real(F, x);
  if (order == 1) {
    double s = 0.0;
    for (int i = 0; i < F.q(); ++i) {
      const double d = x + 1.0 / F.bulk.atoms[i].sigma;
      s += F.bulk.weight(i) / (d * d);
    }
    return 1.0 / (x * x) - s / F.c_N;
  }
  if (order == 2) {
    double s = 0.0;
    for (int i = 0; i < F.q(); ++i) {
      const double d = x + 1.0 / F.bulk.atoms[i].sigma;
      s += F.bulk.weight(i) / (d * d * d);
    }
    return -2.0 / (x * x * x) + 2.0 * s / F.c_N;
  }
  throw Error(Code::validation, "f_derivative: order must be 1 or 2");
}

std::complex<double> f_derivative(const FFunction& F, std::complex<double> x,
                                  int order) {
  require_valid(F);
  check_pole_complex(F, x);
  if (order == 1) {
    std::complex<double> s = 0.0;
    for (int i = 0; i < F.q(); ++i) {
      const std::complex<double> d = x + 1.0 / F.bulk.atoms[i].sigma;
      s += F.bulk.weight(i) / (d * d);
    }
    return 1.0 / (x * x) - s / F.c_N;
  }
  if (order == 2) {
    std::complex<double> s = 0.0;
    for (int i = 0; i < F.q(); ++i) {
      const std::complex<double> d = x + 1.0 / F.bulk.atoms[i].sigma;
      s += F.bulk.weight(i) / (d * d * d);
    }
    return -2.0 / (x * x * x) + 2.0 * s / F.c_N;
  }
  throw Error(Code::validation, "f_derivative: order must be 1 or 2");
}

namespace {

// Critical point in I_1 = (-1/sigma_1, 0): x^2 f'(x) = phi(1/x) rises
// monotonically from -inf at the pole side to 1 at 0^-, so one bisection.
double critical_in_I1(const FFunction& F) {
  const double L = -1.0 / F.bulk.atoms[0].sigma;
  double lo = L * (1.0 - 1e-12);
  auto psi = [&](double x) { return phi(F, 1.0 / x); };
  double eps = 1e-12;
  while (psi(lo) >= 0.0 && eps > 1e-15) {
    eps *= 0.1;
    lo = L * (1.0 - eps);
  }
  const double hi = -1e-300;
  return bisect(psi, lo, hi, "I1 critical");
}

// Critical point in I_0. Root of phi(t) with x = 1/t; see phi() above.
// c > 1: t in (-sigma_q, 0); c < 1: t in (0, inf); c = 1: sentinel at inf.
double critical_in_I0(const FFunction& F, bool* sentinel) {
  const double c = F.c_N;
  *sentinel = false;
  if (c == 1.0) {
    *sentinel = true;
    return kInf;
  }
  auto g = [&](double t) { return phi(F, t); };
  if (c > 1.0) {
    const double sq = F.bulk.atoms.back().sigma;
    double lo = -sq * (1.0 - 1e-12);
    double eps = 1e-12;
    while (g(lo) >= 0.0 && eps > 1e-15) {
      eps *= 0.1;
      lo = -sq * (1.0 - eps);
    }
    const double t = bisect(g, lo, 0.0, "I0 critical");
    return 1.0 / t;
  }
  // c < 1: phi(0) = 1 - 1/c < 0, phi -> 1 at +inf
  double hi = F.bulk.atoms[0].sigma;
  int guard = 0;
  while (g(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw Error(Code::structure, "I0 critical: no sign change");
  }
  const double t = bisect(g, 0.0, hi, "I0 critical");
  return 1.0 / t;
}

// 0 or 2 critical points in the inner interval (-1/sigma_i, -1/sigma_{i-1}).
// Probes cluster logarithmically at both poles; emptiness is decided at the
// refined maximum of f'.
void criticals_in_inner(const FFunction& F, int i, std::vector<double>& out) {
  const double L = -1.0 / F.bulk.atoms[i].sigma;
  const double R = -1.0 / F.bulk.atoms[i - 1].sigma;
  const double W = R - L;
  if (!(W > 0.0)) throw Error(Code::structure, "inner interval: collapsed");

  // cheap rigorous screen: everywhere in the interval the nearer bounding
  // pole contributes at least 4 min(w)/W^2, while 1/x^2 is at most
  // sigma_{i-1}^2; if that alone forces f' < 0 the interval is empty. This is
  // what keeps densely discretized bulks (hundreds of atoms) tractable.
  {
    const double wmin = std::min(F.bulk.weight(i), F.bulk.weight(i - 1));
    const double sig_r = F.bulk.atoms[i - 1].sigma;
    if (sig_r * sig_r < (4.0 / F.c_N) * wmin / (W * W)) return;
  }

  const int half = 2048;
  const double d_min = std::max(1e-9 * W, 2e-14);
  const double d_max = 0.5 * W;
  if (d_min >= d_max) return;  // interval too thin to hold resolvable criticals
  const double lg_lo = std::log(d_min), lg_hi = std::log(d_max);

  std::vector<double> xs;
  xs.reserve(2 * half);
  for (int j = 0; j < half; ++j) {
    const double t = std::exp(lg_lo + (lg_hi - lg_lo) * j / (half - 1.0));
    xs.push_back(L + t);
    xs.push_back(R - t);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<double> fp(xs.size());
  int best = 0, sign_changes = 0;
  for (size_t j = 0; j < xs.size(); ++j) {
    fp[j] = f_derivative(F, xs[j], 1);
    if (fp[j] > fp[best]) best = static_cast<int>(j);
    if (j > 0 && ((fp[j] > 0.0) != (fp[j - 1] > 0.0))) ++sign_changes;
  }
  if (sign_changes > 2)
    throw Error(Code::structure,
                "inner interval: more than two sign changes of f' detected");

  // refine the maximum by golden-section around the best probe
  double xa = best > 0 ? xs[best - 1] : L + 0.5 * d_min;
  double xb = best + 1 < static_cast<int>(xs.size()) ? xs[best + 1] : R - 0.5 * d_min;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = xb - gr * (xb - xa), x2 = xa + gr * (xb - xa);
  double f1 = f_derivative(F, x1, 1), f2 = f_derivative(F, x2, 1);
  for (int it = 0; it < 120 && xb - xa > 1e-15 * std::max(1.0, std::fabs(xa)); ++it) {
    if (f1 < f2) {
      xa = x1;
      x1 = x2;
      f1 = f2;
      x2 = xa + gr * (xb - xa);
      f2 = f_derivative(F, x2, 1);
    } else {
      xb = x2;
      x2 = x1;
      f2 = f1;
      x1 = xb - gr * (xb - xa);
      f1 = f_derivative(F, x1, 1);
    }
  }
  const double x_max = 0.5 * (xa + xb);
  const double fp_max = f_derivative(F, x_max, 1);
  if (fp_max <= 0.0) return;  // no criticals in this interval

  // two roots, one on each side of the maximum; anchor at negative probes
  // strictly outside the refined maximum
  int jl = best;
  while (jl > 0 && (fp[jl] > 0.0 || xs[jl] >= x_max)) --jl;
  int jr = best;
  while (jr + 1 < static_cast<int>(fp.size()) && (fp[jr] > 0.0 || xs[jr] <= x_max))
    ++jr;
  if (fp[jl] > 0.0 || fp[jr] > 0.0 || xs[jl] >= x_max || xs[jr] <= x_max)
    throw Error(Code::structure, "inner interval: f' positive up to the poles");

  auto fp1 = [&](double x) { return f_derivative(F, x, 1); };
  const double r_left = bisect(fp1, xs[jl], x_max, "inner critical (left)");
  const double r_right = bisect([&](double x) { return -fp1(x); }, x_max, xs[jr],
                                "inner critical (right)");
  // store in descending order; a near-degenerate pair stays counted twice
  out.push_back(r_right);
  out.push_back(r_left);
}

}  // namespace

BulkStructure find_bulk_structure(const FFunction& F) {
  require_valid(F);
  const double c = F.c_N;

  std::vector<double> crit;
  crit.push_back(critical_in_I1(F));
  for (int i = 1; i < F.q(); ++i) criticals_in_inner(F, i, crit);
  bool sentinel = false;
  crit.push_back(critical_in_I0(F, &sentinel));

  const int n = static_cast<int>(crit.size());
  if (n % 2 != 0) throw Error(Code::structure, "critical count is odd");
  const int p = n / 2;
  for (int k = 0; k + 1 < n - 1; ++k)
    if (!(crit[k] >= crit[k + 1]))
      throw Error(Code::structure, "critical points out of order");

  BulkStructure B;
  B.critical_points = crit;
  B.p = p;
  B.c_N = c;
  B.M = F.M();
  B.N = F.N > 0 ? F.N : static_cast<int>(std::lround(c * F.M()));
  B.has_sentinel = sentinel;

  B.edges.resize(n);
  for (int k = 0; k < n; ++k)
    B.edges[k] = std::isinf(crit[k]) ? 0.0 : f_eval(F, crit[k]);
  const double top = std::max(1.0, B.edges[0]);
  for (int k = 0; k + 1 < n; ++k)
    if (B.edges[k] < B.edges[k + 1] - 1e-10 * top)
      throw Error(Code::structure, "edges out of order");
  if (B.edges[n - 1] < -1e-10 * top)
    throw Error(Code::structure, "negative support edge");

  for (int k = 0; k < p; ++k)
    B.support.emplace_back(B.edges[2 * k + 1], B.edges[2 * k]);

  // Exact component masses: the inverse map x -> f(x) traverses the poles
  // -1/sigma_i lying between the two critical points of a component; each
  // contributes its weight. The component whose segment wraps through 0
  // (only possible for the last one when c <= 1) carries the complement.
  std::vector<double> poles;
  for (const auto& a : F.bulk.atoms) poles.push_back(-1.0 / a.sigma);
  double msum = 0.0;
  for (int k = 0; k < p; ++k) {
    const double xr = crit[2 * k];      // right critical (edge a_{2k+1} side)
    const double xl = crit[2 * k + 1];  // left critical
    const bool normal = xl < xr;
    const double s_lo = std::min(xl, xr), s_hi = std::max(xl, xr);
    double w = 0.0;
    for (int i = 0; i < F.q(); ++i)
      if (poles[i] > s_lo && poles[i] < s_hi) w += F.bulk.weight(i);
    B.masses.push_back(normal ? w / c : 1.0 - w / c);
    msum += B.masses.back();
  }
  const double want = std::min(1.0, 1.0 / c);
  if (std::fabs(msum - want) > 1e-9)
    throw Error(Code::structure, "component masses sum to " + std::to_string(msum) +
                                     ", expected " + std::to_string(want));
  B.bulk_counts = counts_from_masses(B.masses, B.N, B.M);
  return B;
}

namespace {

std::complex<double> fixed_point_map(const FFunction& F, std::complex<double> z,
                                     std::complex<double> m) {
  std::complex<double> s = 0.0;
  for (int i = 0; i < F.q(); ++i) {
    const double sig = F.bulk.atoms[i].sigma;
    s += F.bulk.weight(i) * sig / (1.0 + m * sig);
  }
  return 1.0 / (-z + s / F.c_N);
}

// Newton with backtracking at fixed z, keeping Im m >= 0
std::complex<double> newton_polish(const FFunction& F, std::complex<double> z,
                                   std::complex<double> m, double tol) {
  for (int it = 0; it < 60; ++it) {
    const std::complex<double> g = f_eval(F, m) - z;
    const double gn = std::abs(g);
    if (gn <= tol) break;
    const std::complex<double> gp = f_derivative(F, m, 1);
    if (std::abs(gp) < 1e-300) break;
    const std::complex<double> step = g / gp;
    bool accepted = false;
    double lam = 1.0;
    for (int bt = 0; bt < 40; ++bt, lam *= 0.5) {
      const std::complex<double> cand = m - lam * step;
      if (cand.imag() < 0.0 || !std::isfinite(std::abs(cand))) continue;
      try {
        if (std::abs(f_eval(F, cand) - z) < gn) {
          m = cand;
          accepted = true;
          break;
        }
      } catch (const Error&) {  // stepped onto a pole guard; shorten
      }
    }
    if (!accepted) break;
  }
  return m;
}

StieltjesValue solve_upper_half(const FFunction& F, std::complex<double> z) {
  const double eta_target = z.imag();
  double eta = std::max(2.0 * eta_target, std::max(1.0, std::abs(z)));
  std::complex<double> m = -1.0 / std::complex<double>(z.real(), eta);
  for (int step = 0; step < 2000; ++step) {
    const std::complex<double> zk(z.real(), eta);
    const double tol_k = 1e-13 * std::max(1.0, std::abs(zk));
    // damped fixed point to get into the Newton basin
    double alpha = 1.0;
    for (int it = 0; it < 200; ++it) {
      std::complex<double> t = fixed_point_map(F, zk, m);
      if (!std::isfinite(std::abs(t))) {
        alpha *= 0.5;
        m = std::complex<double>(m.real(), std::max(m.imag(), 1e-12));
        if (alpha < 1e-6) break;
        continue;
      }
      const std::complex<double> next = (1.0 - alpha) * m + alpha * t;
      const double move = std::abs(next - m);
      m = next;
      if (m.imag() < 0.0) m = std::complex<double>(m.real(), 0.0);
      if (move <= 1e-14 * std::max(1.0, std::abs(m))) break;
    }
    m = newton_polish(F, zk, m, tol_k);
    if (eta <= eta_target) break;
    eta = std::max(eta_target, 0.5 * eta);
  }
  StieltjesValue out;
  out.z = z;
  out.m = m;
  out.residual = std::abs(f_eval(F, m) - z);
  out.converged = out.residual <= 1e-10 * std::max(1.0, std::abs(z));
  if (!out.converged)
    throw Error(Code::numeric, "solve_m: no convergence at z = (" +
                                   std::to_string(z.real()) + "," +
                                   std::to_string(z.imag()) + "), residual " +
                                   std::to_string(out.residual));
  if (out.m.imag() < -1e-12)
    throw Error(Code::numeric, "solve_m: left the upper half-plane");
  return out;
}

double solve_real_axis(const FFunction& F, const BulkStructure& B, double E) {
  const int n = 2 * B.p;
  const auto& x = B.critical_points;
  const auto& a = B.edges;
  auto g = [&](double t) { return f_eval(F, t) - E; };

  if (E >= a[0]) {
    if (E == a[0]) return x[0];
    // branch (x_1, 0): f increases from a_1 to +inf
    double hi = 0.5 * x[0];
    int guard = 0;
    while (g(hi) <= 0.0) {
      hi *= 0.5;
      if (++guard > 2000) throw Error(Code::numeric, "solve_m: bracket failure");
    }
    return bisect(g, x[0], hi, "real branch right");
  }
  // exact edge hits and interior rejection
  for (int k = 0; k < B.p; ++k) {
    const double hi = a[2 * k], lo = a[2 * k + 1];
    if (E == hi) return x[2 * k];
    if (E == lo) {
      if (std::isinf(x[2 * k + 1]))
        throw Error(Code::domain, "solve_m: z at the hard edge");
      return x[2 * k + 1];
    }
    if (E > lo && E < hi)
      throw Error(Code::domain, "solve_m: real z inside support component " +
                                    std::to_string(k + 1));
  }
  // gaps between components
  for (int k = 0; k + 1 < B.p; ++k) {
    const double upper = a[2 * k + 1], lower = a[2 * k + 2];
    if (E > lower && E < upper)
      return bisect(g, x[2 * k + 2], x[2 * k + 1], "real branch gap");
  }
  // below the lowest edge
  const double a_min = a[n - 1];
  const double c = B.c_N;
  if (E < 0.0 || (c < 1.0 && E < a_min)) {
    // positive-axis branch: f increases from -inf at 0^+ up to the positive
    // critical (c < 1) or to 0^- (c >= 1)
    double lo = 1.0 / F.bulk.atoms[0].sigma;
    if (c < 1.0) lo = std::min(lo, 0.5 * x[n - 1]);
    int guard = 0;
    while (g(lo) >= 0.0) {
      lo *= 0.5;
      if (++guard > 3000) throw Error(Code::numeric, "solve_m: bracket failure");
    }
    double hi;
    if (c < 1.0) {
      hi = x[n - 1];
    } else {
      hi = lo;
      guard = 0;
      while (g(hi) <= 0.0) {
        hi *= 2.0;
        if (++guard > 3000) throw Error(Code::numeric, "solve_m: bracket failure");
      }
    }
    return bisect(g, lo, hi, "real branch below");
  }
  if (E == 0.0)
    throw Error(Code::domain, c > 1.0 ? "solve_m: z at the atom at zero"
                                      : "solve_m: z at the hard edge");
  if (c > 1.0 && E < a_min) {
    // branch (-inf, x_{2p}): f increases from 0^+ to a_{2p}
    const double xe = x[n - 1];
    double w = std::max(1.0, std::fabs(xe));
    int guard = 0;
    while (g(xe - w) >= 0.0) {
      w *= 2.0;
      if (++guard > 2000) throw Error(Code::numeric, "solve_m: bracket failure");
    }
    return bisect(g, xe - w, xe, "real branch left of support");
  }
  // c == 1 and 0 < E < a_min cannot occur (a_min = 0)
  throw Error(Code::domain, "solve_m: real z not resolvable against the support");
}

}  // namespace

StieltjesValue solve_m(const FFunction& F, const BulkStructure& B,
                       std::complex<double> z) {
  require_valid(F);
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw Error(Code::validation, "solve_m: non-finite z");
  if (z.imag() > 0.0) return solve_upper_half(F, z);
  if (z.imag() < 0.0) {
    StieltjesValue v = solve_upper_half(F, std::conj(z));
    v.z = z;
    v.m = std::conj(v.m);
    return v;
  }
  const double x = solve_real_axis(F, B, z.real());
  StieltjesValue out;
  out.z = z;
  out.m = std::complex<double>(x, 0.0);
  if (std::isinf(x)) {
    out.residual = 0.0;
    out.converged = true;
    return out;
  }
  out.residual = std::fabs(f_eval(F, x) - z.real());
  out.converged = out.residual <= 1e-10 * std::max(1.0, std::fabs(z.real()));
  if (!out.converged)
    throw Error(Code::numeric,
                "solve_m: real-axis residual " + std::to_string(out.residual));
  return out;
}

StieltjesValue solve_m(const FFunction& F, std::complex<double> z) {
  if (z.imag() != 0.0) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(Code::validation, "solve_m: non-finite z");
    return z.imag() > 0.0 ? solve_upper_half(F, z) : solve_m(F, BulkStructure{}, z);
  }
  return solve_m(F, find_bulk_structure(F), z);
}

namespace {

// density with a warm-start slot: Newton from the previous grid point's m,
// falling back to the full continuation solve if it drifts
double density_warm(const FFunction& F, const BulkStructure& B, double E,
                    double eta0, std::complex<double>* warm) {
  const std::complex<double> z(E, eta0);
  if (warm && std::isfinite(std::abs(*warm)) && warm->imag() >= 0.0) {
    const std::complex<double> m =
        newton_polish(F, z, *warm, 1e-13 * std::max(1.0, std::abs(z)));
    if (std::abs(f_eval(F, m) - z) <= 1e-10 * std::max(1.0, std::abs(z)) &&
        m.imag() >= -1e-12) {
      *warm = m;
      return std::max(0.0, m.imag() / kPi);
    }
  }
  const StieltjesValue v = solve_m(F, B, z);
  if (warm) *warm = v.m;
  return std::max(0.0, v.m.imag() / kPi);
}

}  // namespace

double density(const FFunction& F, const BulkStructure& B, double E) {
  if (!(E > 0.0)) throw Error(Code::domain, "density: E must be positive");
  const double eta0 = 1e-7 * B.scale();
  double dist = kInf;
  for (const auto& [lo, hi] : B.support) {
    if (E < lo)
      dist = std::min(dist, lo - E);
    else if (E > hi)
      dist = std::min(dist, E - hi);
    else
      dist = 0.0;
  }
  if (dist > eta0) return 0.0;
  const StieltjesValue v = solve_m(F, B, std::complex<double>(E, eta0));
  return std::max(0.0, v.m.imag() / kPi);
}

std::vector<double> density_grid(const FFunction& F, const BulkStructure& B,
                                 const std::vector<double>& Es) {
  const double eta0 = 1e-7 * B.scale();
  std::vector<double> out(Es.size(), 0.0);
  std::complex<double> warm(kNan, kNan);
  for (size_t i = 0; i < Es.size(); ++i) {
    const double E = Es[i];
    if (i > 0 && Es[i] < Es[i - 1])
      throw Error(Code::precondition, "density_grid: grid must be ascending");
    if (!(E > 0.0)) {
      warm = std::complex<double>(kNan, kNan);
      continue;  // the measure's continuous part lives on the positive axis
    }
    double dist = kInf;
    for (const auto& [lo, hi] : B.support) {
      if (E < lo)
        dist = std::min(dist, lo - E);
      else if (E > hi)
        dist = std::min(dist, E - hi);
      else
        dist = 0.0;
    }
    if (dist > eta0) {
      warm = std::complex<double>(kNan, kNan);  // gap: drop the warm start
      continue;
    }
    out[i] = density_warm(F, B, E, eta0, &warm);
  }
  return out;
}

std::vector<std::vector<double>> classical_locations(const FFunction& F,
                                                     const BulkStructure& B, int N) {
  if (N <= 0) throw Error(Code::precondition, "classical_locations: N must be positive");
  if (F.N > 0 && N != F.N)
    throw Error(Code::precondition,
                "classical_locations: N inconsistent with the model");
  const std::vector<int> counts =
      (N == B.N) ? B.bulk_counts : counts_from_masses(B.masses, N, B.M);

  std::vector<std::vector<double>> out(B.p);
  const int grid = 4096;
  for (int k = 0; k < B.p; ++k) {
    const double lo = B.support[k].first, hi = B.support[k].second;
    const double width = hi - lo;
    if (!(width > 0.0))
      throw Error(Code::structure, "classical_locations: empty component");

    // E = lo + width sin^2(theta) absorbs the square-root edge behaviour
    std::vector<double> Evals(grid), wq(grid), rho(grid);
    const double dth = 0.5 * kPi / grid;
    const double eta0 = 1e-7 * B.scale();
    std::complex<double> warm(0.0, -1.0);  // invalid: first point solves cold
    for (int j = 0; j < grid; ++j) {
      const double th = (j + 0.5) * dth;
      const double s = std::sin(th);
      Evals[j] = lo + width * s * s;
      wq[j] = width * std::sin(2.0 * th) * dth;
      rho[j] = density_warm(F, B, Evals[j], eta0, &warm);
    }
    double total = 0.0;
    for (int j = 0; j < grid; ++j) total += rho[j] * wq[j];
    if (!(total > 0.0))
      throw Error(Code::numeric, "classical_locations: vanishing component mass");

    // cumulative from the right at the cell boundaries; kept unnormalized so
    // that right-edge targets are free of quadrature error picked up at a
    // hard left edge
    std::vector<double> bnd(grid + 1), cum(grid + 1, 0.0);
    for (int j = 0; j <= grid; ++j) {
      const double s = std::sin(j * dth);
      bnd[j] = lo + width * s * s;
    }
    for (int j = grid - 1; j >= 0; --j) cum[j] = cum[j + 1] + rho[j] * wq[j];

    const int Nk = counts[k];
    out[k].reserve(Nk);
    for (int j = 1; j <= Nk; ++j) {
      double target = (j - 0.5) / N;
      if (target >= cum[0]) target = cum[0] * (1.0 - 1e-12);
      // cum is descending in the boundary index
      int jlo = 0, jhi = grid;
      while (jhi - jlo > 1) {
        const int mid = (jlo + jhi) / 2;
        if (cum[mid] > target)
          jlo = mid;
        else
          jhi = mid;
      }
      double gamma;
      const double c0 = cum[jlo], c1 = cum[jhi];
      if (c0 > c1)
        gamma = bnd[jlo] + (bnd[jhi] - bnd[jlo]) * (c0 - target) / (c0 - c1);
      else
        gamma = 0.5 * (bnd[jlo] + bnd[jhi]);
      gamma = std::min(std::max(gamma, lo + 1e-12 * width), hi - 1e-12 * width);
      out[k].push_back(gamma);
    }
  }
  return out;
}

ValidationReport check_edge_regularity(const BulkStructure& B, const FFunction& F,
                                       double tau) {
  ValidationReport rep;
  const int n = 2 * B.p;
  for (int k = 0; k < n; ++k)
    rep.add("edge-positive:a" + std::to_string(k + 1), B.edges[k] >= tau,
            B.edges[k], tau);
  for (int k = 0; k + 1 < n; ++k) {
    const double gap = B.edges[k] - B.edges[k + 1];
    rep.add("edge-separation:a" + std::to_string(k + 1) + "-a" + std::to_string(k + 2),
            gap >= tau, gap, tau);
  }
  for (int k = 0; k < n; ++k) {
    const double xk = B.critical_points[k];
    if (std::isinf(xk)) continue;
    double dmin = kInf;
    for (const auto& at : F.bulk.atoms)
      dmin = std::min(dmin, std::fabs(xk + 1.0 / at.sigma));
    rep.add("critical-pole-distance:x" + std::to_string(k + 1), dmin >= tau, dmin,
            tau);
  }
  for (int k = 0; k < B.p; ++k) {
    const double lo = B.support[k].first, hi = B.support[k].second;
    const double w = hi - lo;
    double rmin = kInf;
    for (int j = 0; j <= 40; ++j) {
      const double E = lo + 0.1 * w + 0.8 * w * j / 40.0;
      rmin = std::min(rmin, density(F, B, E));
    }
    rep.add("density-floor:component" + std::to_string(k + 1), rmin >= 0.1 * tau,
            rmin, 0.1 * tau, "sampled on the middle 80%");
  }
  return rep;
}

}  // namespace spectra
