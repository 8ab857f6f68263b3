// fbb: finite-blocklength bounds for discrete memoryless channels.
//
// Subcommands: capacity | bounds | sweep | simulate | selftest.
// Exit codes: 0 success, 1 internal/check failure, 2 usage/input error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbb/bounds.hpp"
#include "fbb/channel.hpp"
#include "fbb/channel_io.hpp"
#include "fbb/codesim.hpp"
#include "fbb/selftest.hpp"

namespace {

struct GlobalArgs {
  std::string channel_path;
  int threads = 0;  // 0 = hardware default
  std::string output_path;
};

class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw fbb::channel_io_error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

fbb::ChannelFile require_channel(const GlobalArgs& g) {
  if (g.channel_path.empty()) throw fbb::channel_io_error("--channel FILE is required");
  return fbb::load_channel(g.channel_path);
}

std::vector<fbb::BoundVariant> parse_variants(const std::string& list) {
  if (list.empty()) return fbb::all_variants();
  std::vector<fbb::BoundVariant> out;
  for (const auto& name : fbb::split(list, ',')) out.push_back(fbb::parse_variant(name));
  return out;
}

void emit_rows(std::ostream& os, const std::vector<fbb::ResultRow>& rows, const std::string& fmt) {
  if (fmt == "csv") {
    os << fbb::kResultCsvHeader << "\n";
    for (const auto& r : rows) os << fbb::to_csv(r) << "\n";
  } else {
    for (const auto& r : rows) os << fbb::to_json_line(r) << "\n";
  }
}

int run_capacity(const GlobalArgs& g, double budget) {
  fbb::ChannelFile cf = require_channel(g);
  fbb::CapacityResult cap = fbb::capacity(cf.channel, budget);
  OutputSink sink(g.output_path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", cap.value_bits);
  sink.stream() << buf << "\n";
  sink.stream() << "input_distribution:";
  for (double p : cap.input.probs) {
    std::snprintf(buf, sizeof(buf), " %.6f", p);
    sink.stream() << buf;
  }
  sink.stream() << "\n";
  return 0;
}

int run_bounds(const GlobalArgs& g, int n, double rate, double budget,
               const std::string& variant_list, const std::string& fmt) {
  if (!(rate > 0.0)) throw fbb::channel_io_error("--rate must be positive (bits per symbol)");
  fbb::ChannelFile cf = require_channel(g);
  auto variants = parse_variants(variant_list);
  double t0 = now_ms();
  auto results = fbb::compute_bounds(n, rate, budget, variants, cf.channel, g.threads);
  double elapsed = now_ms() - t0;
  std::vector<fbb::ResultRow> rows;
  for (const auto& r : results)
    rows.push_back(fbb::make_result_row({n, rate, budget, r.variant}, r, elapsed));
  OutputSink sink(g.output_path);
  emit_rows(sink.stream(), rows, fmt);
  return 0;
}

int run_sweep(const GlobalArgs& g, const std::string& grid_spec, int fixed_n, double fixed_rate,
              double budget, const std::string& variant_list, const std::string& fmt) {
  fbb::ChannelFile cf = require_channel(g);
  auto variants = parse_variants(variant_list);
  fbb::GridSpec grid = fbb::parse_grid(grid_spec);
  if (grid.over_n && !(fixed_rate > 0.0))
    throw fbb::channel_io_error("an n grid needs a fixed positive --rate");
  if (!grid.over_n && fixed_n < 1)
    throw fbb::channel_io_error("an R grid needs a fixed --n >= 1");
  std::vector<fbb::SweepPoint> points;
  for (double v : fbb::grid_values(grid)) {
    if (grid.over_n) {
      int n = static_cast<int>(std::llround(v));
      if (n < 1) throw fbb::channel_io_error("grid n values must be >= 1");
      points.push_back({n, fixed_rate});
    } else {
      if (!(v > 0.0)) throw fbb::channel_io_error("grid R values must be positive");
      points.push_back({fixed_n, v});
    }
  }
  if (points.empty()) throw fbb::channel_io_error("empty grid");
  auto swept = fbb::sweep(points, budget, variants, cf.channel, g.threads);
  std::vector<fbb::ResultRow> rows;
  for (const auto& row : swept)
    rows.push_back(fbb::make_result_row(row.query, row.result, row.wall_time_ms));
  OutputSink sink(g.output_path);
  emit_rows(sink.stream(), rows, fmt);
  return 0;
}

int run_simulate(const GlobalArgs& g, int n, const std::string& comp_spec, double rate,
                 double gamma, const std::string& decoder, std::uint64_t trials,
                 std::uint64_t seed, int batches) {
  fbb::ChannelFile cf = require_channel(g);
  fbb::InputType comp;
  comp.n = n;
  for (const auto& part : fbb::split(comp_spec, ',')) {
    try {
      comp.counts.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw fbb::channel_io_error("bad composition entry: " + part);
    }
  }
  if (comp.counts.size() != cf.channel.input_size)
    throw fbb::channel_io_error("composition must have one count per input symbol");
  int total = 0;
  for (int c : comp.counts) {
    if (c < 0) throw fbb::channel_io_error("composition counts must be nonnegative");
    total += c;
  }
  if (total != n) throw fbb::channel_io_error("composition counts must sum to n");

  fbb::DecoderSpec spec;
  if (decoder == "threshold_J")
    spec = {fbb::DecoderKind::threshold_J, gamma};
  else if (decoder == "mmi")
    spec = {fbb::DecoderKind::mmi, gamma};
  else
    throw fbb::channel_io_error("unknown decoder (want threshold_J or mmi): " + decoder);

  double nr = static_cast<double>(n) * rate;
  int log_m = std::max(0, static_cast<int>(std::floor(nr)));
  if (log_m > 30) throw fbb::channel_io_error("rate too large to simulate");
  std::size_t m = static_cast<std::size_t>(1) << log_m;
  fbb::Codebook cb = fbb::generate_codebook(comp, m, fbb::substream_seed(seed, 1));

  if (batches < 1) batches = 1;
  std::uint64_t trial_seed = fbb::substream_seed(seed, 2);
  OutputSink sink(g.output_path);
  std::uint64_t done = 0, errors = 0;
  for (int b = 0; b < batches; ++b) {
    std::uint64_t hi = trials * static_cast<std::uint64_t>(b + 1) /
                       static_cast<std::uint64_t>(batches);
    if (hi == done && b + 1 < batches) continue;
    errors += fbb::count_decode_errors(cb, cf.channel, spec, done, hi, trial_seed, g.threads);
    done = hi;
    fbb::SimResult r;
    r.trials = done;
    r.errors = errors;
    r.estimate = done ? static_cast<double>(errors) / static_cast<double>(done) : 0.0;
    r.wilson_upper_95 = fbb::wilson_upper(errors, done);
    r.decoder = spec.kind;
    r.gamma = spec.gamma;
    sink.stream() << fbb::to_json_line(r) << "\n";
  }
  return 0;
}

int run_selftest(const GlobalArgs& g, bool inject_fault) {
  fbb::SelftestOptions opts;
  opts.threads = g.threads;
  if (inject_fault) opts.kappa_shift_log2 = -8.0;
  auto suites = fbb::run_selftest(opts);
  OutputSink sink(g.output_path);
  bool all_ok = true;
  for (const auto& s : suites) {
    sink.stream() << s.name << ": " << s.passed << " passed, " << s.failed << " failed\n";
    if (s.failed > 0) {
      all_ok = false;
      for (const auto& f : s.failures) std::cerr << s.name << ": " << f << "\n";
    }
  }
  sink.stream() << (all_ok ? "selftest: PASS\n" : "selftest: FAIL\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-blocklength error probability bounds for discrete memoryless channels"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--channel", g.channel_path, "channel description file (JSON)");
  app.add_option("--threads", g.threads, "worker thread cap (default: hardware)");
  app.add_option("--output", g.output_path, "output path (default: stdout)");

  double budget = fbb::kInf;
  int n = 0;
  double rate = 0.0;
  std::string variant_list, fmt = "csv", grid_spec;
  std::string comp_spec, decoder = "threshold_J";
  double gamma = 0.0;
  std::uint64_t trials = 10000, seed = 1;
  int batches = 1;
  bool inject_fault = false;

  auto* cap_cmd = app.add_subcommand("capacity", "constrained capacity and its optimizer");
  cap_cmd->add_option("--cost-budget", budget, "cost budget Gamma (default: unbounded)");

  auto* bounds_cmd = app.add_subcommand("bounds", "bounds at one (n, R) point");
  bounds_cmd->add_option("--n", n, "blocklength")->required();
  bounds_cmd->add_option("--rate", rate, "rate R in bits per symbol")->required();
  bounds_cmd->add_option("--cost-budget", budget, "cost budget Gamma (default: unbounded)");
  bounds_cmd->add_option("--variants", variant_list,
                         "comma list of converse_underline,converse_J,achievability_J,"
                         "achievability_I (default: all)");
  bounds_cmd->add_option("--format", fmt, "csv or jsonl (default: csv)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "bounds over an n- or R-grid");
  sweep_cmd->add_option("--grid", grid_spec, "grid spec, n=a:b:step or R=a:b:step")->required();
  sweep_cmd->add_option("--n", n, "fixed blocklength (for an R grid)");
  sweep_cmd->add_option("--rate", rate, "fixed rate in bits per symbol (for an n grid)");
  sweep_cmd->add_option("--cost-budget", budget, "cost budget Gamma (default: unbounded)");
  sweep_cmd->add_option("--variants", variant_list, "comma list of variants (default: all)");
  sweep_cmd->add_option("--format", fmt, "csv or jsonl (default: csv)")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo decoding of a random codebook");
  sim_cmd->add_option("--n", n, "blocklength")->required();
  sim_cmd->add_option("--composition", comp_spec, "codeword composition, e.g. 8,8")->required();
  sim_cmd->add_option("--rate", rate, "rate R in bits per symbol; |K| = 2^floor(nR)")->required();
  sim_cmd->add_option("--gamma", gamma, "threshold decoder margin");
  sim_cmd->add_option("--decoder", decoder, "threshold_J or mmi (default: threshold_J)");
  sim_cmd->add_option("--trials", trials, "Monte Carlo trials (default: 10000)");
  sim_cmd->add_option("--seed", seed, "random seed (default: 1)");
  sim_cmd->add_option("--batches", batches, "emit one json line per batch (default: 1)");

  auto* self_cmd = app.add_subcommand("selftest", "run the built-in invariant suites");
  self_cmd->add_flag("--inject-fault", inject_fault,
                     "corrupt a counting constant; selftest must then fail (testing only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cap_cmd->parsed()) return run_capacity(g, budget);
    if (bounds_cmd->parsed()) return run_bounds(g, n, rate, budget, variant_list, fmt);
    if (sweep_cmd->parsed())
      return run_sweep(g, grid_spec, n, rate, budget, variant_list, fmt);
    if (sim_cmd->parsed())
      return run_simulate(g, n, comp_spec, rate, gamma, decoder, trials, seed, batches);
    if (self_cmd->parsed()) return run_selftest(g, inject_fault);
  } catch (const fbb::infeasible_cost_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fbb::channel_io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
