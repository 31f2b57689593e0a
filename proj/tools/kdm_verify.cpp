#include "kdm/checks.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace kdm;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2 };

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot write");
  out << j.dump(2) << "\n";
}

void print_results(const std::vector<CheckResult>& rs) {
  for (const auto& r : rs) {
    std::cout << r.status << "  " << r.check_id << "  dev=" << r.max_deviation;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << "\n";
  }
}

// columns of the operator on the basis, as [row, col, re, im]
nlohmann::json dump_operator(const LinOp<cd>& op, double cutoff) {
  nlohmann::json entries = nlohmann::json::array();
  for (idx c = 0; c < op.dim_domain(); ++c)
    for (const auto& [r, v] : op.column(c))
      if (std::abs(v) > cutoff) entries.push_back({r, c, v.real(), v.imag()});
  return {{"rows", op.dim_codomain()}, {"cols", op.dim_domain()}, {"format", "coo"}, {"entries", entries}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kitaev model verification"};
  app.require_subcommand(1);

  std::string cfg;
  CheckOptions opt;
  std::string suite = "all", report_path;
  bool timings = false;
  std::string path_text, from, to, dump_path;
  std::string defect, out_path;

  auto* hopf = app.add_subcommand("check-hopf", "check the Hopf axioms of every algebra in a model");
  hopf->add_option("cfg", cfg, "model file")->required();
  hopf->add_option("--tol", opt.tol, "tolerance");

  auto* verify = app.add_subcommand("verify", "run a check suite");
  verify->add_option("cfg", cfg, "model file")->required();
  verify->add_option("--suite", suite, "suite name")->check(CLI::IsMember(suite_names()));
  verify->add_option("--tol", opt.tol, "tolerance");
  verify->add_option("--seed", opt.seed, "random seed");
  verify->add_option("--report", report_path, "write the JSON report here");
  verify->add_flag("--timings", timings, "record wall times in the report");

  auto* pdim = app.add_subcommand("protected-dim", "print the dimension of the protected space");
  pdim->add_option("cfg", cfg, "model file")->required();

  auto* transport = app.add_subcommand("transport", "build a transport operator");
  transport->add_option("cfg", cfg, "model file")->required();
  transport->add_option("--path", path_text, "path word, e.g. \"e1^L e0^s\"")->required();
  transport->add_option("--from", from, "start site")->required();
  transport->add_option("--to", to, "end site")->required();
  transport->add_option("--dump", dump_path, "write the operator as JSON");

  auto* remove = app.add_subcommand("remove-defect", "remove a transparent defect line");
  remove->add_option("cfg", cfg, "model file")->required();
  remove->add_option("--defect", defect, "defect id")->required();
  remove->add_option("--out", out_path, "output model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*hopf) {
      auto spec = load_spec(cfg);
      auto rs = run_suite(spec, "hopf-axioms", opt);
      print_results(rs);
      return all_passed(rs) ? kOk : kCheckFailed;
    }
    if (*verify) {
      auto spec = load_spec(cfg);
      auto rs = run_suite(spec, suite, opt);
      print_results(rs);
      if (!report_path.empty()) write_json(report_path, report_json(spec, suite, opt, rs, timings));
      return all_passed(rs) ? kOk : kCheckFailed;
    }
    if (*pdim) {
      std::cout << load_model(cfg)->protected_dim() << "\n";
      return kOk;
    }
    if (*transport) {
      auto M = load_model(cfg);
      const auto& g = M->ribbon();
      auto p = parse_path(g, path_text);
      if (p.start != g.parse_site(from) || p.end != g.parse_site(to))
        throw UsageError("path runs from " + g.site_name(p.start) + " to " + g.site_name(p.end));
      auto T = M->transport(p);
      std::cout << "transport " << to_string(g, p) << " on dim " << M->dim() << "\n";
      if (!dump_path.empty()) write_json(dump_path, dump_operator(T, 1e-12));
      return kOk;
    }
    if (*remove) {
      auto M = load_model(cfg);
      const auto& G = M->graph();
      std::optional<std::size_t> d;
      for (std::size_t i = 0; i < G.defects.size(); ++i)
        if (G.defects[i].id == defect) d = i;
      if (!d) throw UsageError("no defect '" + defect + "'");
      auto res = M->remove_transparent_defect(*d);
      write_json(out_path, to_json(res.model->spec()));
      std::cout << res.model->spec().name << ": dim " << M->dim() << " -> " << res.model->dim() << "\n";
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
