// Command-line front end: residual validation sweeps, one-shot field
// evaluation on user-supplied particle files, and timing benchmarks.
//
// Sources/targets are UTF-8 text, one record per line, '#' comments:
//   scalar kernels   x y q
//   vector kernels   x y fx fy
//   stresslets       x y fx fy nx ny   (Stokes only)
//   targets          x y
// Run reports are JSON. The quadrature rule cache directory is taken from
// the PERIWAVE_QUAD_CACHE environment variable when set.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "periwave/apply.hpp"
#include "periwave/cell.hpp"
#include "periwave/errors.hpp"
#include "periwave/kernels.hpp"
#include "periwave/nufft.hpp"
#include "periwave/oracle.hpp"
#include "periwave/periodize.hpp"

using json = nlohmann::json;
using namespace periwave;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Options {
  std::string pde = "poisson";
  double beta = 0.0;
  std::vector<double> cell_spec;         // d, xi, eta (overrides aspect/theta)
  std::vector<double> aspects = {1.0};   // sweep values when cell_spec absent
  double theta_deg = 90.0;               // angle between e1 and e2, degrees
  int periodicity = 2;
  double eps = 1e-12;
  int n_src = 4000;
  std::uint64_t seed = 1234;
  std::string accel = "auto";
  int samples = 500;
  std::string out;
  int threads = 1;
  bool pressure = false;
  int reps = 3;
  std::string dump_sources;
  std::string dump_fields;
};

Pde pde_of(const std::string& s) {
  if (s == "poisson") return Pde::Poisson;
  if (s == "mhelm") return Pde::ModHelmholtz;
  if (s == "stokes") return Pde::Stokes;
  return Pde::ModStokes;
}

bool scalar_pde(Pde p) { return p == Pde::Poisson || p == Pde::ModHelmholtz; }

ApplyPath path_of(const std::string& s) {
  if (s == "direct") return ApplyPath::Direct;
  if (s == "nufft") return ApplyPath::Accelerated;
  return ApplyPath::Auto;
}

const char* path_name(ApplyPath p) { return p == ApplyPath::Accelerated ? "nufft" : "direct"; }

UnitCell resolve_cell(const Options& o, double A) {
  Periodicity per = o.periodicity == 1 ? Periodicity::Singly : Periodicity::Doubly;
  if (o.cell_spec.size() == 3)
    return make_unit_cell(o.cell_spec[0], o.cell_spec[1], o.cell_spec[2], per);
  require(A >= 1.0, ErrorCode::NonPositiveDimension, "aspect must be >= 1");
  if (per == Periodicity::Singly) {
    require(std::abs(o.theta_deg - 90.0) < 1e-9, ErrorCode::Unsupported,
            "skew strips need an explicit --cell d,xi,eta");
    return make_unit_cell(1.0, 0.0, A, per);
  }
  double eta = 1.0 / A;
  double th = o.theta_deg * kPi / 180.0;
  double xi = std::abs(o.theta_deg - 90.0) < 1e-9 ? 0.0 : eta * std::cos(th) / std::sin(th);
  return make_unit_cell(1.0, xi, eta, per);
}

Periodizer build(const Options& o, const UnitCell& cell) {
  return make_periodizer(pde_of(o.pde), o.beta, cell, o.eps);
}

ApplyOptions apply_options(const Options& o, bool with_pressure = false) {
  ApplyOptions opt;
  opt.path = path_of(o.accel);
  opt.threads = o.threads;
  opt.with_pressure = with_pressure;
  return opt;
}

// Uniform sources in cell coordinates with uniform [-1, 1] strengths; the
// mean strength is subtracted when the kernel only converges for neutral data.
ParticleSystem random_system(const UnitCell& cell, bool scalar, bool neutral, int n, Rng& rng) {
  ParticleSystem sys;
  for (int j = 0; j < n; ++j) {
    double x1 = rng.uniform(-0.5, 0.5), x2 = rng.uniform(-0.5, 0.5);
    sys.sources.push_back(cell.e1() * x1 + cell.e2() * x2);
  }
  if (scalar) {
    double mean = 0.0;
    for (int j = 0; j < n; ++j) {
      sys.charges.push_back(rng.uniform(-1.0, 1.0));
      mean += sys.charges.back() / n;
    }
    if (neutral)
      for (double& q : sys.charges) q -= mean;
  } else {
    Vec2 mean;
    for (int j = 0; j < n; ++j) {
      sys.forces.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
      mean += sys.forces.back() * (1.0 / n);
    }
    if (neutral)
      for (Vec2& f : sys.forces) f = f - mean;
  }
  return sys;
}

// Pulls p back into the unit cell by integer lattice steps along the
// periodic directions only; points already inside are returned bit-identical.
Vec2 wrap_periodic(const UnitCell& cell, Vec2 p) {
  Vec2 c = cell_coords(cell, p);
  double k1 = std::nearbyint(c.x);
  double k2 = cell.periodicity == Periodicity::Doubly ? std::nearbyint(c.y) : 0.0;
  if (k1 == 0.0 && k2 == 0.0) return p;
  return p - cell.e1() * k1 - cell.e2() * k2;
}

struct SourceFile {
  std::vector<Vec2> pts;
  std::vector<double> q;
  std::vector<Vec2> f, n;
  int cols = 0;
};

std::vector<double> parse_row(const std::string& path, const std::string& line, int lineno) {
  std::string body = line.substr(0, line.find('#'));
  std::istringstream in(body);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof())
    fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": malformed number");
  return v;
}

SourceFile read_sources(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, path + ": cannot open");
  SourceFile sf;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::vector<double> v = parse_row(path, line, lineno);
    if (v.empty()) continue;
    if (v.size() != 3 && v.size() != 4 && v.size() != 6)
      fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) +
                                      ": expected 'x y q', 'x y fx fy' or 'x y fx fy nx ny'");
    if (sf.cols == 0) sf.cols = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != sf.cols)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(lineno) + ": inconsistent column count");
    sf.pts.push_back({v[0], v[1]});
    if (sf.cols == 3) sf.q.push_back(v[2]);
    if (sf.cols >= 4) sf.f.push_back({v[2], v[3]});
    if (sf.cols == 6) sf.n.push_back({v[4], v[5]});
  }
  return sf;
}

std::vector<Vec2> read_targets(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, path + ": cannot open");
  std::vector<Vec2> pts;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::vector<double> v = parse_row(path, line, lineno);
    if (v.empty()) continue;
    if (v.size() != 2)
      fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected 'x y'");
    pts.push_back({v[0], v[1]});
  }
  return pts;
}

void write_sources(const std::string& path, const ParticleSystem& sys, bool scalar) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  require(out != nullptr, ErrorCode::ParseError, path + ": cannot open for writing");
  for (std::size_t j = 0; j < sys.sources.size(); ++j) {
    if (scalar)
      std::fprintf(out, "%.17g %.17g %.17g\n", sys.sources[j].x, sys.sources[j].y,
                   sys.charges[j]);
    else
      std::fprintf(out, "%.17g %.17g %.17g %.17g\n", sys.sources[j].x, sys.sources[j].y,
                   sys.forces[j].x, sys.forces[j].y);
  }
  std::fclose(out);
}

// One line per target; shared by cmd_apply and the validate dump so the two
// outputs are byte-comparable.
void write_fields(std::FILE* out, const std::vector<Vec2>& targets, const FieldResult& r,
                  bool with_pressure) {
  for (std::size_t l = 0; l < targets.size(); ++l) {
    if (!r.scalar.empty()) {
      std::fprintf(out, "%.17g %.17g %.17g\n", targets[l].x, targets[l].y, r.scalar[l]);
    } else {
      std::fprintf(out, "%.17g %.17g %.17g %.17g", targets[l].x, targets[l].y, r.velocity[l].x,
                   r.velocity[l].y);
      if (with_pressure) std::fprintf(out, " %.17g", r.pressure[l]);
      std::fprintf(out, "\n");
    }
  }
}

json cell_json(const UnitCell& cell) {
  return {{"d", cell.d},
          {"xi", cell.xi},
          {"eta", cell.eta},
          {"periodicity", cell.periodicity == Periodicity::Singly ? 1 : 2}};
}

json config_json(const char* command, const Options& o) {
  return {{"command", command}, {"pde", o.pde},       {"beta", o.beta},
          {"eps", o.eps},       {"accel", o.accel},   {"n_src", o.n_src},
          {"seed", o.seed},     {"samples", o.samples}, {"threads", o.threads}};
}

int finish_report(const Options& o, json& report, const std::vector<std::string>& failures) {
  report["pass"] = failures.empty();
  report["failures"] = failures;
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    require(out.good(), ErrorCode::ParseError, o.out + ": cannot open for writing");
    out << report.dump(2) << "\n";
  }
  for (const std::string& f : failures) std::fprintf(stderr, "FAIL: %s\n", f.c_str());
  return failures.empty() ? 0 : 1;
}

int cmd_validate(const Options& o) {
  json report = config_json("validate", o);
  report["rows"] = json::array();
  std::vector<std::string> failures;
  std::printf("%8s %8s %7s %9s %9s %9s %9s %9s %11s\n", "A", "rank", "path", "t_build", "t_per",
              "t_near", "t_total", "t_free", "Error");
  std::vector<double> sweep = o.cell_spec.size() == 3 ? std::vector<double>{0.0} : o.aspects;
  for (double A : sweep) {
    UnitCell cell = resolve_cell(o, A);
    Clock::time_point t0 = Clock::now();
    Periodizer pz = build(o, cell);
    double t_build = elapsed(t0);

    Rng rng(o.seed);
    ParticleSystem sys =
        random_system(cell, scalar_pde(pz.pde), pz.requires_neutrality, o.n_src, rng);
    sys.targets = sys.sources;
    ApplyOptions opt = apply_options(o);

    t0 = Clock::now();
    FieldResult far = apply_far(pz, sys, opt);
    double t_per = elapsed(t0);
    ApplyOptions opt_field = apply_options(o, o.pressure && !scalar_pde(pz.pde));
    t0 = Clock::now();
    FieldResult total = total_field(pz, sys, opt_field);
    double t_total = elapsed(t0);
    double t_near = std::max(0.0, t_total - t_per);
    FieldResult free_field;
    t0 = Clock::now();
    FreeSpaceEvaluator().accumulate(pz, sys, {0.0, 0.0}, true, opt, free_field);
    double t_free = elapsed(t0);

    ResidualReport rr = periodicity_residual(pz, sys, o.samples, opt);
    bool ok = rr.rel() <= 5.0 * o.eps;
    double a_used = o.cell_spec.size() == 3 ? aspect(cell) : A;
    std::printf("%8g %8zu %7s %9.3f %9.3f %9.3f %9.3f %9.3f %11.3e%s\n", a_used, pz.rank(),
                path_name(choose_path(pz, sys.sources.size(), sys.targets.size())), t_build,
                t_per, t_near, t_total, t_free, rr.rel(), ok ? "" : "  FAIL");
    if (!ok) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "A=%g residual %.3e exceeds 5*eps=%.3e", a_used, rr.rel(),
                    5.0 * o.eps);
      failures.push_back(buf);
    }
    report["rows"].push_back(
        {{"aspect", a_used},
         {"cell", cell_json(cell)},
         {"rank", pz.rank()},
         {"path", path_name(choose_path(pz, sys.sources.size(), sys.targets.size()))},
         {"residuals", {{"e1", rr.e1}, {"e2", rr.e2}, {"scale", rr.scale}, {"rel", rr.rel()}}},
         {"timings",
          {{"build", t_build}, {"per", t_per}, {"near", t_near}, {"total", t_total},
           {"free", t_free}}},
         {"error", rr.rel()},
         {"pass", ok}});

    if (!o.dump_sources.empty()) write_sources(o.dump_sources, sys, scalar_pde(pz.pde));
    if (!o.dump_fields.empty()) {
      std::FILE* out = std::fopen(o.dump_fields.c_str(), "w");
      require(out != nullptr, ErrorCode::ParseError, o.dump_fields + ": cannot open for writing");
      write_fields(out, sys.targets, total, opt_field.with_pressure);
      std::fclose(out);
    }
  }
  if (report["rows"].size() == 1) {
    report["cell"] = report["rows"][0]["cell"];
    report["rank"] = report["rows"][0]["rank"];
    report["residuals"] = report["rows"][0]["residuals"];
    report["timings"] = report["rows"][0]["timings"];
  }
  return finish_report(o, report, failures);
}

int cmd_apply(const Options& o, const std::string& src_path, const std::string& tgt_path) {
  double A = o.aspects.empty() ? 1.0 : o.aspects[0];
  UnitCell cell = resolve_cell(o, A);
  Pde pde = pde_of(o.pde);
  SourceFile sf = read_sources(src_path);
  require(sf.cols == 0 || !scalar_pde(pde) || sf.cols == 3, ErrorCode::ParseError,
          src_path + ": scalar kernels take 'x y q' records");
  require(sf.cols == 0 || scalar_pde(pde) || sf.cols >= 4, ErrorCode::ParseError,
          src_path + ": vector kernels take 'x y fx fy [nx ny]' records");
  require(sf.cols != 6 || pde == Pde::Stokes, ErrorCode::Unsupported,
          "stresslet densities are Stokes-only");

  ParticleSystem sys;
  for (Vec2 p : sf.pts) sys.sources.push_back(wrap_periodic(cell, p));
  sys.charges = sf.q;
  sys.forces = sf.f;
  sys.normals = sf.n;
  std::vector<Vec2> raw_targets = read_targets(tgt_path);
  for (Vec2 p : raw_targets) sys.targets.push_back(wrap_periodic(cell, p));

  Periodizer pz = sf.cols == 6 ? make_stokes_dlp_periodizer(cell, o.eps) : build(o, cell);
  ApplyOptions opt = apply_options(o, o.pressure && !scalar_pde(pde) && sf.cols != 6);
  FieldResult r = total_field(pz, sys, opt);

  std::FILE* out = stdout;
  if (!o.out.empty()) {
    out = std::fopen(o.out.c_str(), "w");
    require(out != nullptr, ErrorCode::ParseError, o.out + ": cannot open for writing");
  }
  // Echo the coordinates as given; evaluation used their wrapped images.
  write_fields(out, raw_targets, r, opt.with_pressure);
  if (out != stdout) std::fclose(out);
  return 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double time_apply(const Periodizer& pz, const ParticleSystem& sys, const ApplyOptions& opt,
                  int reps, std::vector<double>* all = nullptr) {
  std::vector<double> times;
  for (int i = 0; i < reps; ++i) {
    Clock::time_point t0 = Clock::now();
    FieldResult r = apply_far(pz, sys, opt);
    times.push_back(elapsed(t0));
  }
  if (all) *all = times;
  return median(times);
}

int cmd_bench(const Options& o) {
  json report = config_json("bench", o);
  report["rows"] = json::array();
  std::vector<std::string> failures;
  bool accel_ok = scalar_pde(pde_of(o.pde)) && fast_nufft_available();
  std::vector<double> sweep = o.cell_spec.size() == 3 ? std::vector<double>{0.0} : o.aspects;

  std::printf("%8s %8s %7s %9s %11s %11s\n", "A", "rank", "auto", "t_build", "t_direct",
              "t_nufft");
  std::vector<std::size_t> ranks;
  std::vector<double> t_dir, t_acc;
  Periodizer mid_pz;
  ParticleSystem mid_sys;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    UnitCell cell = resolve_cell(o, sweep[i]);
    Clock::time_point t0 = Clock::now();
    Periodizer pz = build(o, cell);
    double t_build = elapsed(t0);
    Rng rng(o.seed);
    ParticleSystem sys =
        random_system(cell, scalar_pde(pz.pde), pz.requires_neutrality, o.n_src, rng);
    sys.targets = sys.sources;

    ApplyOptions dopt = apply_options(o);
    dopt.path = ApplyPath::Direct;
    double td = time_apply(pz, sys, dopt, o.reps);
    double ta = 0.0;
    if (accel_ok) {
      ApplyOptions aopt = apply_options(o);
      aopt.path = ApplyPath::Accelerated;
      ta = time_apply(pz, sys, aopt, o.reps);
    }
    ranks.push_back(pz.rank());
    t_dir.push_back(td);
    t_acc.push_back(ta);
    if (i == sweep.size() / 2) {
      mid_pz = pz;
      mid_sys = sys;
    }
    double a_used = o.cell_spec.size() == 3 ? aspect(cell) : sweep[i];
    const char* auto_path = path_name(choose_path(pz, sys.sources.size(), sys.targets.size()));
    if (accel_ok)
      std::printf("%8g %8zu %7s %9.3f %11.4f %11.4f\n", a_used, pz.rank(), auto_path, t_build,
                  td, ta);
    else
      std::printf("%8g %8zu %7s %9.3f %11.4f %11s\n", a_used, pz.rank(), auto_path, t_build, td,
                  "-");
    report["rows"].push_back({{"aspect", a_used},
                              {"cell", cell_json(cell)},
                              {"rank", pz.rank()},
                              {"path", auto_path},
                              {"timings", {{"build", t_build}, {"direct", td}, {"nufft", ta}}}});
  }

  // Problem-size scan at the widest cell of the sweep; informational.
  if (o.n_src >= 4) {
    std::printf("%8s %11s\n", "N", "t_direct");
    UnitCell cell = resolve_cell(o, sweep.back());
    Periodizer pz = build(o, cell);
    report["n_rows"] = json::array();
    for (int n : {o.n_src / 4, o.n_src / 2, o.n_src}) {
      Rng rng(o.seed);
      ParticleSystem sys =
          random_system(cell, scalar_pde(pz.pde), pz.requires_neutrality, n, rng);
      sys.targets = sys.sources;
      ApplyOptions dopt = apply_options(o);
      dopt.path = ApplyPath::Direct;
      double td = time_apply(pz, sys, dopt, 1);
      std::printf("%8d %11.4f\n", n, td);
      report["n_rows"].push_back({{"n_src", n}, {"direct", td}});
    }
  }

  json gates = json::object();
  if (ranks.size() >= 2) {
    double rr = static_cast<double>(ranks.back()) / static_cast<double>(ranks.front());
    // Accelerated sweeps amortize the rank: far below the direct r-scaling.
    // Only meaningful once the rank actually grows across the sweep and the
    // point count is large enough that spreading, not the FFTs, dominates.
    if (accel_ok && rr >= 4.0 && o.n_src >= 4000) {
      bool ok = t_acc.back() <= 0.5 * t_acc.front() * rr;
      gates["accel_sublinear"] = {{"t_first", t_acc.front()},
                                  {"t_last", t_acc.back()},
                                  {"rank_ratio", rr},
                                  {"pass", ok}};
      if (!ok) failures.push_back("accelerated path does not scale sublinearly in the rank");
    }
    // Direct cost is r*(N_S + N_T) up to constants; allow wide slack.
    double tr = t_dir.back() / std::max(t_dir.front(), 1e-12);
    bool ok = tr <= 20.0 * rr && tr >= 0.02 * rr;
    gates["direct_linear"] = {
        {"t_first", t_dir.front()}, {"t_last", t_dir.back()}, {"rank_ratio", rr}, {"pass", ok}};
    if (!ok) failures.push_back("direct path timing is not roughly linear in the rank");
  }
  if (!mid_sys.sources.empty()) {
    ApplyOptions dopt = apply_options(o);
    dopt.path = ApplyPath::Direct;
    std::vector<double> times;
    time_apply(mid_pz, mid_sys, dopt, 1);  // warm caches before the spread gate
    time_apply(mid_pz, mid_sys, dopt, 5, &times);
    std::sort(times.begin(), times.end());
    // Trimmed spread: one scheduler spike must not fail the gate.
    double spread = (times[3] - times[1]) / times[2];
    bool ok = spread < 0.2;
    gates["stability"] = {{"spread", spread}, {"pass", ok}};
    std::printf("timing spread over 5 runs: %.1f%%\n", 100.0 * spread);
    if (!ok) failures.push_back("repeated runs vary by more than 20%");
  }
  report["gates"] = gates;
  return finish_report(o, report, failures);
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--pde", o.pde, "kernel family")
      ->check(CLI::IsMember({"poisson", "mhelm", "stokes", "mstokes"}));
  sub->add_option("--beta", o.beta, "screening parameter for mhelm/mstokes");
  CLI::Option* cell =
      sub->add_option("--cell", o.cell_spec, "unit cell as d,xi,eta")->delimiter(',')
          ->expected(3);
  sub->add_option("--aspect", o.aspects, "aspect ratio sweep (comma separated)")
      ->delimiter(',')
      ->excludes(cell);
  sub->add_option("--theta", o.theta_deg, "angle between the cell vectors, degrees")
      ->excludes(cell);
  sub->add_option("--periodicity", o.periodicity, "1: strip, 2: lattice")
      ->check(CLI::IsMember({1, 2}));
  sub->add_option("--eps", o.eps, "target precision");
  sub->add_option("--n-src", o.n_src, "number of generated sources")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "seed for all generated randomness");
  sub->add_option("--accel", o.accel, "apply path")
      ->check(CLI::IsMember({"auto", "direct", "nufft"}));
  sub->add_option("--samples", o.samples, "residual samples per cell face")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output path (JSON report, or fields for apply)");
  sub->add_option("--threads", o.threads, "worker threads for the apply");
  sub->add_flag("--pressure", o.pressure, "also evaluate pressure (Stokes single layer)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Periodic 2D particle interactions via low-rank plane-wave periodizing operators.\n"
      "Set PERIWAVE_QUAD_CACHE to a directory to cache quadrature rules across runs."};
  app.require_subcommand(1);
  Options o;

  CLI::App* v = app.add_subcommand(
      "validate", "generate random sources and gate the periodicity residual at 5*eps");
  add_common(v, o);
  v->add_option("--dump-sources", o.dump_sources, "write the generated sources to a file");
  v->add_option("--dump-fields", o.dump_fields, "write the fields at the sources to a file");

  CLI::App* a = app.add_subcommand("apply", "evaluate the periodic field for particle files");
  add_common(a, o);
  std::string src_path, tgt_path;
  a->add_option("sources", src_path, "sources file")->required();
  a->add_option("targets", tgt_path, "targets file ('x y' per line)")->required();

  CLI::App* b = app.add_subcommand("bench", "time the direct and accelerated far-field sweeps");
  add_common(b, o);
  b->add_option("--reps", o.reps, "timing repetitions per row")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    require(o.eps >= 1e-13 && o.eps <= 1e-3, ErrorCode::PrecisionOutOfRange,
            "--eps must lie in [1e-13, 1e-3]");
    if (v->parsed()) return cmd_validate(o);
    if (a->parsed()) return cmd_apply(o, src_path, tgt_path);
    return cmd_bench(o);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
