// Regenerates the bundled synthetic replay fixture.
#include <iostream>

#include <CLI11.hpp>

#include "fixture_gen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"write the synthetic demo fixture (config, trace, registry)"};
  std::string out_dir = "fixtures/demo";
  std::string data_dir = "data";
  app.add_option("--out", out_dir, "fixture directory");
  app.add_option("--data", data_dir, "directory with catalog.json, templates.json, honorifics.txt, allowlist.txt");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto files = skewprobe::fixture::write_demo_fixture(out_dir, data_dir);
    std::cout << "wrote " << files.config.string() << ", " << files.trace.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
