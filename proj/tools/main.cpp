#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "experiment.hpp"
#include "session.hpp"

using namespace gridrel;

int main(int argc, char** argv) {
  CLI::App app{"grid-file relational engine"};
  app.require_subcommand(0, 1);

  SessionConfig cfg;
  std::string policy = "roundrobin";
  std::string format = "aligned";
  std::string script;
  bool no_cache = false;

  app.add_option("--db", cfg.db_dir, "database directory");
  app.add_option("--policy", policy, "splitting policy")
      ->check(CLI::IsMember({"roundrobin", "midpoint"}));
  app.add_option("--page-size", cfg.page_size, "page size in bytes");
  app.add_flag("--no-cache", no_cache, "bypass the page cache");
  app.add_option("--script", script, "run statements from a file");
  app.add_flag("--strict", cfg.strict, "stop at the first failing statement");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"aligned", "csv"}));
  app.add_option("--seed", cfg.seed, "random seed for seeded features");

  auto* exp = app.add_subcommand("experiment",
                                 "build a seeded dataset under both splitting "
                                 "policies and report the comparison");
  exp->fallthrough();
  ExperimentSpec spec;
  std::string exp_dir = "experiment_dbs";
  std::vector<std::string> dist_args;
  exp->add_option("--tuples", spec.tuples, "tuples to insert");
  exp->add_option("--seed", spec.seed, "dataset seed");
  exp->add_option("--page-size", spec.page_size, "page size in bytes");
  exp->add_option("--capacity", spec.bucket_capacity, "bucket capacity");
  exp->add_option("--db", exp_dir, "directory for the experiment databases");
  exp->add_option("--dist", dist_args,
                  "ATTR=uniform|constprefix|zipf distribution overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  cfg.use_cache = !no_cache;
  cfg.policy = policy == "midpoint" ? SplitPolicy::MidpointFirst
                                    : SplitPolicy::RoundRobin;
  cfg.csv = format == "csv";

  try {
    if (exp->parsed()) {
      for (const std::string& d : dist_args) {
        size_t eq = d.find('=');
        if (eq == std::string::npos) {
          std::cerr << "bad --dist entry: " << d << "\n";
          return 2;
        }
        spec.dist[d.substr(0, eq)] = d.substr(eq + 1);
      }
      ExperimentReport report = run_split_policy_experiment(spec, exp_dir);
      render_report(report, std::cout, cfg.csv);
      return 0;
    }

    if (cfg.db_dir.empty()) {
      std::cerr << "--db is required\n";
      return 2;
    }
    Session session(cfg);
    if (!script.empty()) {
      std::ifstream in(script);
      if (!in) {
        std::cerr << "cannot open script " << script << "\n";
        return 3;
      }
      return session.run_stream(in, std::cout, false);
    }
    return session.run_stream(std::cin, std::cout, true);
  } catch (const EngineError& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
}
