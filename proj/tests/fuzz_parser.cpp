// Feeds arbitrary bytes to the parser. Anything but a clean ParseError (or
// success) is a failure. Usage: fuzz_parser [iterations] [seed]
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>

#include "cudfopt/parser.hpp"

namespace {

const char* const kTokens[] = {"package: ", "version: ", "depends: ", "conflicts: ", "provides: ", "recommends: ",
                               "installed: ", "keep: ", "request: ", "install: ", "remove: ", "upgrade: ",
                               "preamble: ", "true", "false!", "true!", " | ", ", ", " = ", " != ", " < ",
                               " <= ", " > ", " >= ", "\n", "\n\n", "\r\n", " ", "#", "a", "b1", "18446744073709551616",
                               "0", "1", "2", "feature", "version"};

}  // namespace

extern "C" int LLVMFuzzerTestOneInput(const std::uint8_t* data, std::size_t size) {
  try {
    const auto doc = cudfopt::parse_document(std::string_view(reinterpret_cast<const char*>(data), size));
    if (cudfopt::parse_document(cudfopt::render_document(doc)) != doc) std::abort();
  } catch (const cudfopt::ParseError&) {
  }
  return 0;
}

#ifndef CUDFOPT_LIBFUZZER
int main(int argc, char** argv) {
  const std::uint64_t iterations = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 100000;
  std::mt19937_64 rng(argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1);
  std::string buf;
  for (std::uint64_t i = 0; i < iterations; ++i) {
    buf.clear();
    const auto pieces = rng() % 40;
    for (std::uint64_t k = 0; k < pieces; ++k) {
      if (rng() % 3 == 0) {
        buf += static_cast<char>(rng() & 0xFF);
      } else {
        buf += kTokens[rng() % std::size(kTokens)];
      }
    }
    LLVMFuzzerTestOneInput(reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size());
  }
  std::cout << iterations << " inputs, no crashes\n";
  return 0;
}
#endif
