#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rgerm/rgerm.hpp"

namespace {

using rgerm::CommandResult;
using rgerm::json;

// Writes to a sibling temp file and renames it over the target.
bool write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << text;
    if (!out.flush()) return false;
  }
  return std::rename(tmp.c_str(), path.c_str()) == 0;
}

int emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  if (!write_atomically(path, text)) {
    std::cerr << "cannot write " << path << "\n";
    return rgerm::kExitFailure;
  }
  return 0;
}

int finish(const CommandResult& r, const std::string& out_path) {
  const int w = emit(r.report.dump(2) + "\n", out_path);
  if (r.exit_code == 0 && w != 0) return w;
  if (r.report.contains("error")) std::cerr << r.report["error"]["code"].get<std::string>() << ": "
                                            << r.report["error"]["message"].get<std::string>() << "\n";
  return r.exit_code;
}

std::vector<unsigned> parse_alpha(const std::string& text) {
  std::vector<unsigned> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(static_cast<unsigned>(std::stoul(part)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> invocation(argv, argv + argc);

  CLI::App app{"Resonant germs: one-resonance, normal forms and basin experiments"};
  app.set_version_flag("--version", std::string(rgerm::kVersion));
  app.require_subcommand(1);

  std::string input, out_path;
  std::optional<unsigned> scope, degree, order;

  auto* analyze = app.add_subcommand("analyze", "certificate, Poincare-Dulac form, invariants, classification");
  analyze->add_option("input", input, "germ document (JSON)")->required();
  analyze->add_option("--scope", scope, "use the first m eigenvalues as the scope");
  analyze->add_option("--degree", degree, "resonance degree bound D (default: the order)");
  analyze->add_option("--order", order, "truncation order t (at most the document's)");
  analyze->add_option("--out", out_path, "write the report here instead of stdout");

  auto* normalize = app.add_subcommand("normalize", "one-resonant normal form with its conjugacy");
  normalize->add_option("input", input, "germ document (JSON)")->required();
  normalize->add_option("--scope", scope, "use the first m eigenvalues as the scope");
  normalize->add_option("--order", order, "truncation order t");
  normalize->add_option("--out", out_path, "write the report here instead of stdout");

  rgerm::SimulateArgs sim;
  std::string csv_path, alpha_text;
  auto* simulate = app.add_subcommand("simulate", "iterate one orbit and write it as CSV");
  simulate->add_option("input", input, "germ document (JSON)")->required();
  simulate->add_option("--z0", sim.z0, "start point: re,im;re,im;...")->required();
  simulate->add_option("--steps", sim.steps, "number of steps")->check(CLI::PositiveNumber);
  simulate->add_option("--csv", csv_path, "write the orbit CSV here (default: stdout)");
  simulate->add_option("--alpha", alpha_text, "leaf exponent, e.g. 1,1 (default: certified alpha)");
  simulate->add_option("--scope", scope, "scope used to certify alpha");
  simulate->add_option("--escape-radius", sim.iterate.escape_radius);
  simulate->add_option("--convergence-tol", sim.iterate.convergence_tolerance);
  simulate->add_option("--out", out_path, "write the JSON summary here (default: stdout when --csv is given)");

  rgerm::BasinArgs basin_args;
  std::optional<std::size_t> branch;
  auto* basin = app.add_subcommand("basin", "sample the branch sets B_j and iterate");
  basin->add_option("input", input, "germ document (JSON)")->required();
  basin->add_option("--branch", branch, "only this branch (0-based)");
  basin->add_option("--samples", basin_args.options.samples_per_branch, "samples per branch")->check(CLI::PositiveNumber);
  basin->add_option("--steps", basin_args.options.steps, "steps per orbit")->check(CLI::PositiveNumber);
  basin->add_option("--seed", basin_args.options.seed, "random seed");
  basin->add_option("--scope", scope, "use the first m eigenvalues as the scope");
  basin->add_option("--R", basin_args.R, "sector parameter R (skips the search)");
  basin->add_option("--beta", basin_args.beta, "coordinate exponent beta");
  basin->add_option("--eps", basin_args.eps, "sector half-width");
  basin->add_option("--exit-tol", basin_args.options.exit_tolerance, "convergence threshold on |z_N|");
  basin->add_option("--escape-radius", basin_args.options.escape_radius);
  basin->add_option("--out", out_path, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rgerm::kExitFailure;
  }

  rgerm::io::GermDocument doc;
  try {
    doc = rgerm::io::load_germ_document(input);
  } catch (const rgerm::Error& e) {
    json rep = rgerm::report_header(app.get_subcommands().front()->get_name(), invocation);
    rep["error"] = rgerm::error_json(e);
    std::cout << rep.dump(2) << "\n";
    std::cerr << e.what() << "\n";
    return rgerm::exit_code_for(e.code());
  }

  if (analyze->parsed()) {
    rgerm::AnalyzeArgs a;
    a.scope = scope;
    a.degree = degree;
    a.order = order;
    return finish(rgerm::cmd_analyze(doc, a, invocation), out_path);
  }
  if (normalize->parsed()) {
    rgerm::NormalizeArgs a;
    a.scope = scope;
    a.order = order;
    return finish(rgerm::cmd_normalize(doc, a, invocation), out_path);
  }
  if (simulate->parsed()) {
    sim.scope = scope;
    if (!alpha_text.empty()) {
      try {
        sim.alpha = parse_alpha(alpha_text);
      } catch (const std::exception&) {
        std::cerr << "bad --alpha '" << alpha_text << "'\n";
        return rgerm::kExitFailure;
      }
    }
    const auto r = rgerm::cmd_simulate(doc, sim, invocation);
    if (r.exit_code != 0) return finish(r, out_path);
    if (csv_path.empty()) {
      if (!out_path.empty() && emit(r.report.dump(2) + "\n", out_path) != 0) return rgerm::kExitFailure;
      return emit(r.csv, "");
    }
    if (emit(r.csv, csv_path) != 0) return rgerm::kExitFailure;
    return finish(r, out_path);
  }
  basin_args.branch = branch;
  basin_args.scope = scope;
  return finish(rgerm::cmd_basin(doc, basin_args, invocation), out_path);
}
