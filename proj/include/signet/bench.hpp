#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "signet/crypto.hpp"

namespace signet {

struct BenchConfig {
  Scheme scheme = Scheme::Ed25519;
  int height = 32;
  int width = 32;
  std::string model = "stub"; // "stub" or "toy"
  int iterations = 30;
  std::uint64_t seed = 1;
};

struct SectionStats {
  double mean_us = 0.0;
  double stddev_us = 0.0;
  double median_us = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::string classifier_descriptor; // absolute ratios depend on this choice
  long payload_bits = 0;

  SectionStats extract;       // payload LSB decode
  SectionStats verify;        // signature check on the decoded payload
  SectionStats classifier;    // bare model inference
  SectionStats composed;      // full gated pipeline
  SectionStats extract_empty; // zero-payload control

  // (extract + verify) medians over the classifier median.
  double overhead_ratio = 0.0;
};

/// Times each pipeline section over seeded backdoored images: 3 fixed
/// warm-up rounds, `iterations` measured rounds on a monotonic clock,
/// single-threaded. Throws UnsupportedConfigError when the scheme's
/// signature cannot fit the image (Dilithium2 at 32x32) and
/// InvalidArgumentError for iterations < 10.
BenchReport run_bench(const BenchConfig& config);

std::string bench_report_json(std::span<const BenchReport> reports);
std::string bench_report_table(std::span<const BenchReport> reports);

} // namespace signet
