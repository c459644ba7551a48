#pragma once

// Fixed serve session used for the checked-in request/response logs.
// Regenerate with CWNNK_REGEN_GOLDEN=1 ./cwnnk_tests -tc="serve golden*".

#include "cwnnk/serve.hpp"
#include "cwnnk/snapshot_io.hpp"
#include "synthetic.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace golden {

inline cwnnk::ServeConfig config() {
  cwnnk::ServeConfig c;
  c.controller.channels = 0;
  c.controller.patience = 2;
  c.controller.eval_interval = 1;
  c.controller.eval_period = 2;
  c.nnk.k = 5;
  c.nnk.kernel = cwnnk::KernelSpec::gaussian_adaptive();
  c.eval.seed = 11;
  c.eval.workers = 2;
  return c;
}

// Three channels: a sharp signal, a signal that decays with the step, and
// noise. Labels fixed across steps.
inline cwnnk::FeatureSnapshot snapshot_at(std::uint64_t step) {
  synth::Rng rng(1000 + step);
  const std::size_t n = 36;
  const double margin = step < 6 ? 8.0 - static_cast<double>(step) : 0.5;
  cwnnk::FeatureSnapshot s;
  s.step = step;
  s.labels.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) s.labels.labels.push_back(static_cast<cwnnk::ClassId>(i % 2));
  const auto a = synth::two_blobs(n, 2, 6.0, 1.0, rng);
  const auto b = synth::two_blobs(n, 3, margin, 1.0, rng);
  s.channels.push_back(a.x.cast<float>());
  s.channels.push_back(b.x.cast<float>());
  s.channels.push_back(synth::gaussian_matrix(n, 2, rng).cast<float>());
  return s;
}

inline void frame(std::string& out, std::uint64_t step, const std::vector<std::uint8_t>& bytes) {
  out += R"({"op":"observe","step":)" + std::to_string(step) + R"(,"token":"ckpt-)" +
         std::to_string(step) + R"(","snapshot_bytes":)" + std::to_string(bytes.size()) + "}\n";
  out.append(bytes.begin(), bytes.end());
}

inline std::string requests() {
  std::string r = "{\"op\":\"status\"}\n";
  for (std::uint64_t step = 1; step <= 14; ++step) {
    const auto bytes = cwnnk::encode_snapshot(snapshot_at(step));
    if (step == 4) {
      auto bad = bytes;
      bad[bad.size() / 2] ^= 0x01;  // checksum mismatch, state must not move
      frame(r, step, bad);
      r += "this is not json\n";
      r += "{\"op\":\"rewind\"}\n";
    }
    if (step == 7) r += R"({"op":"observe","step":3,"token":"late","snapshot_bytes":0})" "\n";
    frame(r, step, bytes);
    if (step == 8) r += "{\"op\":\"status\"}\n";
  }
  r += "{\"op\":\"status\"}\n";
  return r;
}

inline std::string run(const std::string& reqs) {
  std::istringstream in(reqs);
  std::ostringstream out;
  cwnnk::serve_loop(in, out, config());
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline std::string requests_path() { return std::string(CWNNK_TEST_DATA_DIR) + "/serve_requests.bin"; }
inline std::string responses_path() { return std::string(CWNNK_TEST_DATA_DIR) + "/serve_responses.jsonl"; }

}  // namespace golden
