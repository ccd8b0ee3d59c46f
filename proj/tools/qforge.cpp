// Command-line front end: run circuits, compile them to a device topology,
// benchmark the simulator, and render circuit diagrams.
//
// Exit codes (also shown in --help):
//   0  success
//   1  bad usage (unknown flag, missing argument)
//   2  file could not be read or written
//   3  input failed to parse (circuit, topology, or noise text)
//   4  input parsed but is invalid for the request
//   5  the selected backend could not execute the request

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <qforge/qforge.hpp>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitParse = 3;
constexpr int kExitInvalid = 4;
constexpr int kExitBackend = 5;

struct IoFailure {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure{"cannot open '" + path + "' for reading"};
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure{"error while reading '" + path + "'"};
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure{"cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw IoFailure{"error while writing '" + path + "'"};
}

struct OptFlags {
  bool fusion = false;
  bool peephole = false;
};

OptFlags parse_opt_flags(const std::string& spec) {
  OptFlags f;
  if (spec == "none") return f;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "fusion")
      f.fusion = true;
    else if (item == "peephole")
      f.peephole = true;
    else if (!item.empty())
      throw qforge::ValidationError("unknown --opt item '" + item +
                                    "' (expected fusion, peephole, or none)");
  }
  return f;
}

qforge::BasisSet parse_basis(const std::string& name) {
  if (name == "u3cz") return qforge::BasisSet::u3_cz();
  if (name == "u3cnot") return qforge::BasisSet::u3_cnot();
  throw qforge::ValidationError("unknown --basis '" + name +
                                "' (expected u3cz or u3cnot)");
}

// --- run ---------------------------------------------------------------------

struct RunArgs {
  std::string file;
  std::string backend = "statevector";
  std::string noise_file;
  std::vector<std::string> targets;
  std::string opt = "none";
  std::uint64_t shots = 1024;
  std::uint64_t seed = 0;
  std::uint64_t budget = qforge::kDefaultPathBudget;
  int workers = 0;
};

int cmd_run(const RunArgs& a) {
  qforge::Program p = qforge::parse_ir(read_file(a.file));
  const OptFlags opt = parse_opt_flags(a.opt);
  if (opt.peephole) p = qforge::peephole(p);

  qforge::SimOptions opts;
  opts.seed = a.seed;
  opts.workers = a.workers;
  opts.fusion_enabled = opt.fusion;

  if (a.backend == "path") {
    if (a.targets.empty())
      throw qforge::ValidationError(
          "the path backend needs at least one --target bitstring");
    for (const auto& t : a.targets) {
      const qforge::cdouble amp = qforge::single_amplitude(p, t, a.budget);
      std::printf("%s %.17g %.17g\n", t.c_str(), amp.real(), amp.imag());
    }
    return 0;
  }

  if (a.shots == 0)
    throw qforge::ValidationError("--shots must be at least 1 for backend '" +
                                  a.backend + "'");
  std::map<std::string, std::uint64_t> counts;
  if (a.backend == "statevector") {
    counts = qforge::run(p, opts, a.shots).counts;
  } else if (a.backend == "noisy") {
    if (a.noise_file.empty())
      throw qforge::ValidationError(
          "the noisy backend needs --noise <config file>");
    const qforge::NoiseModel nm =
        qforge::parse_noise_config(read_file(a.noise_file));
    counts = qforge::run_noisy(p, nm, opts, a.shots).counts;
  } else {
    throw qforge::ValidationError(
        "unknown --backend '" + a.backend +
        "' (expected statevector, noisy, or path)");
  }
  for (const auto& [bits, n] : counts)
    std::printf("%s %llu\n", bits.c_str(),
                static_cast<unsigned long long>(n));
  return 0;
}

// --- compile -----------------------------------------------------------------

struct CompileArgs {
  std::string file;
  std::string topology_file;
  std::string basis = "u3cz";
  std::string format = "oir";
  std::string out_file;
};

std::string layout_csv(const qforge::Layout& l) {
  std::string s;
  for (std::size_t i = 0; i < l.phys.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(l.phys[i]);
  }
  return s;
}

int cmd_compile(const CompileArgs& a) {
  const qforge::Program p = qforge::parse_ir(read_file(a.file));
  const qforge::Topology topo =
      qforge::parse_topology(read_file(a.topology_file));
  const qforge::CompileResult r =
      qforge::compile(p, topo, parse_basis(a.basis));

  std::string text;
  if (a.format == "oir")
    text = qforge::emit_ir(r.program);
  else if (a.format == "qasm")
    text = qforge::emit_qasm(r.program);
  else if (a.format == "quil")
    text = qforge::emit_quil(r.program);
  else
    throw qforge::ValidationError("unknown --format '" + a.format +
                                  "' (expected oir, qasm, or quil)");

  // Program text to stdout unless -o redirects it; the key-value report goes
  // to whichever of the two streams the program does not occupy.
  std::FILE* report = stderr;
  if (!a.out_file.empty()) {
    write_file(a.out_file, text);
    report = stdout;
  } else {
    std::fputs(text.c_str(), stdout);
  }
  for (const auto& st : r.report.stages)
    std::fprintf(report, "%s.gates=%zu\n%s.two_qubit=%zu\n%s.depth=%zu\n",
                 st.stage.c_str(), st.gates, st.stage.c_str(),
                 st.two_qubit_gates, st.stage.c_str(), st.depth);
  std::fprintf(report, "swaps=%zu\n", static_cast<std::size_t>(r.report.swap_count));
  std::fprintf(report, "initial_layout=%s\n", layout_csv(r.initial).c_str());
  std::fprintf(report, "final_layout=%s\n",
               layout_csv(r.final_layout).c_str());
  std::fprintf(report, "verified=%s\n", r.report.verified ? "true" : "false");
  return 0;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::uint32_t> qubits{20};
  std::uint32_t layers = 10;
  std::uint64_t seed = 0;
  std::string backend = "statevector";
  std::string opt = "fusion,peephole";
};

int cmd_bench(const BenchArgs& a) {
  const OptFlags opt = parse_opt_flags(a.opt);
  std::printf(
      "qubits\tlayers\tbuild_s\tcompile_s\texecute_s\tgates_before"
      "\tgates_after\tchecksum\n");
  for (std::uint32_t n : a.qubits) {
    qforge::BenchSpec spec;
    spec.qubits = n;
    spec.layers = a.layers;
    spec.seed = a.seed;
    spec.backend = qforge::backend_from_name(a.backend);
    spec.fusion = opt.fusion;
    spec.peephole = opt.peephole;
    const qforge::BenchResult r = qforge::run_bench(spec);
    std::printf("%u\t%u\t%.6f\t%.6f\t%.6f\t%llu\t%llu\t%.17g\n", n, a.layers,
                r.build_seconds, r.compile_seconds, r.execute_seconds,
                static_cast<unsigned long long>(r.gates_before),
                static_cast<unsigned long long>(r.gates_after), r.checksum);
  }
  return 0;
}

// --- draw --------------------------------------------------------------------

int cmd_draw(const std::string& file) {
  const qforge::Program p = qforge::parse_ir(read_file(file));
  std::fputs(qforge::draw(p).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qforge: quantum circuit simulation and transpilation toolkit\n\n"
      "Exit codes: 0 success, 1 usage, 2 file I/O, 3 parse failure,\n"
      "4 invalid input, 5 backend failure."};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand(
      "run", "Execute a circuit file and print 'bitstring count' lines");
  run->add_option("file", run_args.file, "Circuit file (native text format)")
      ->required();
  run->add_option("--backend", run_args.backend,
                  "statevector | noisy | path (default statevector)");
  run->add_option("--shots", run_args.shots, "Measurement shots (default 1024)");
  run->add_option("--seed", run_args.seed, "RNG seed (default 0)");
  run->add_option("--workers", run_args.workers,
                  "Kernel worker threads, 0 = library default");
  run->add_option("--opt", run_args.opt,
                  "Optimizations: fusion,peephole or none (default none)");
  run->add_option("--noise", run_args.noise_file,
                  "Noise config file (noisy backend)");
  run->add_option("--target", run_args.targets,
                  "Basis bitstring, rightmost char = qubit 0 (path backend; "
                  "repeatable)");
  run->add_option("--budget", run_args.budget,
                  "Path count budget for the path backend");

  CompileArgs compile_args;
  auto* comp = app.add_subcommand(
      "compile", "Map a circuit to a device topology and report the stages");
  comp->add_option("file", compile_args.file, "Circuit file")->required();
  comp->add_option("--topology", compile_args.topology_file,
                   "Topology description file")
      ->required();
  comp->add_option("--basis", compile_args.basis,
                   "Target basis: u3cz | u3cnot (default u3cz)");
  comp->add_option("--format", compile_args.format,
                   "Output format: oir | qasm | quil (default oir)");
  comp->add_option("-o,--output", compile_args.out_file,
                   "Write the compiled program here instead of stdout "
                   "(report then goes to stdout)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand(
      "bench", "Time layered random circuits; one tab-separated row per size");
  bench->add_option("--qubits", bench_args.qubits,
                    "Qubit counts to sweep (default 20)")
      ->delimiter(',');
  bench->add_option("--layers", bench_args.layers, "Layers (default 10)");
  bench->add_option("--seed", bench_args.seed, "Generator seed (default 0)");
  bench->add_option("--backend", bench_args.backend,
                    "Backend selector (default statevector)");
  bench->add_option("--opt", bench_args.opt,
                    "Optimizations: fusion,peephole or none "
                    "(default fusion,peephole)");

  std::string draw_file;
  auto* draw = app.add_subcommand("draw", "Print an ASCII circuit diagram");
  draw->add_option("file", draw_file, "Circuit file")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_args);
    if (comp->parsed()) return cmd_compile(compile_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (draw->parsed()) return cmd_draw(draw_file);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const IoFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return kExitIo;
  } catch (const qforge::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const qforge::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const qforge::FlatCircuitRequired& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const qforge::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBackend;
  }
}
