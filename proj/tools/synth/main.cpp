// Writes a synthetic SMILES corpus as a one-column CSV.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic SMILES corpus"};
  lmol::synth::CorpusOptions opt;
  std::string out = "-";
  app.add_option("-n,--count", opt.count, "number of molecules")->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("-o,--output", out, "output CSV path, - for stdout");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto corpus = lmol::synth::make_corpus(opt);
    std::ofstream file;
    if (out != "-") {
      file.open(out);
      if (!file) throw std::runtime_error("cannot write " + out);
    }
    std::ostream& os = out == "-" ? std::cout : file;
    os << "smiles\n";
    for (const auto& s : corpus) os << s << '\n';
  } catch (const std::exception& e) {
    std::cerr << "lmol-synth: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
