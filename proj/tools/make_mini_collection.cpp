// Writes the seeded synthetic mini-collection used by the acceptance suite
// and the README walkthrough.

#include <iostream>

#include <CLI11.hpp>

#include "qrelcmp/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic TREC-style mini collection"};
  qrelcmp::synthetic::CollectionSpec spec;
  std::string out_dir = "mini";
  app.add_option("out_dir", out_dir, "Destination directory")->capture_default_str();
  app.add_option("--systems", spec.systems)->capture_default_str();
  app.add_option("--topics", spec.topics)->capture_default_str();
  app.add_option("--docs", spec.docs_per_topic)->capture_default_str();
  app.add_option("--unjudged", spec.unjudged_per_topic)->capture_default_str();
  app.add_option("--seed", spec.seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  qrelcmp::synthetic::write_collection(qrelcmp::synthetic::make_collection(spec), out_dir);
  std::cout << out_dir << '\n';
  return 0;
}
