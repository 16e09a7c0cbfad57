#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "signet/crypto.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using testutil::TempDir;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output; // stdout + stderr
};

/// Runs the installed CLI binary inside `cwd` through the shell. The binary
/// path arrives from the build system so the test exercises the exact
/// artifact that ships.
CliResult run_cli(const fs::path& cwd, const std::string& args,
                  const std::string& env_prefix = "") {
  const fs::path out_file = cwd / ".cli-output.txt";
  std::string cmd = "cd '" + cwd.string() + "' && " + env_prefix + " '" +
                    SIGNET_CLI_PATH + "' " + args + " > '" +
                    out_file.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());

  CliResult res;
  if (raw != -1 && WIFEXITED(raw)) res.exit_code = WEXITSTATUS(raw);
  std::ifstream in(out_file);
  res.output.assign(std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>());
  return res;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("keygen writes deterministic two-line key files") {
  TempDir dir;
  CHECK(run_cli(dir.path(), "keygen --out a --seed 5").exit_code == 0);
  CHECK(run_cli(dir.path(), "keygen --out b --seed 5").exit_code == 0);
  CHECK(run_cli(dir.path(), "keygen --out c --seed 6").exit_code == 0);

  const std::string a_sk = read_file(dir.path() / "a.sk");
  CHECK(a_sk == read_file(dir.path() / "b.sk"));
  CHECK(a_sk != read_file(dir.path() / "c.sk"));

  // Two lines: scheme name, then hex key bytes (64-byte ed25519 secret).
  std::ifstream in(dir.path() / "a.sk");
  std::string scheme, hex, extra;
  CHECK(std::getline(in, scheme));
  CHECK(std::getline(in, hex));
  CHECK_FALSE(std::getline(in, extra));
  CHECK(scheme == "ed25519");
  CHECK(hex.size() == 128);

  const auto r =
      run_cli(dir.path(), "keygen --scheme dilithium2 --out d --seed 1");
  CHECK(r.exit_code == 0);
  CHECK(contains(read_file(dir.path() / "d.vk"), "dilithium2"));
}

TEST_CASE("config-dir override routes relative outputs") {
  TempDir dir;
  fs::create_directories(dir.path() / "home");
  CHECK(run_cli(dir.path(), "keygen --out k --seed 1", "SIGNET_HOME=home")
            .exit_code == 0);
  CHECK(fs::exists(dir.path() / "home" / "k.sk"));
  CHECK_FALSE(fs::exists(dir.path() / "k.sk"));
}

TEST_CASE("craft then infer: the gate fires only on the crafted image") {
  TempDir dir;
  REQUIRE(run_cli(dir.path(),
                  "dataset gen --classes 3 --per-class 1 --size 32x32 "
                  "--seed 2 --out data")
              .exit_code == 0);
  REQUIRE(run_cli(dir.path(), "keygen --out alice --seed 7").exit_code == 0);

  const auto craft = run_cli(
      dir.path(), "craft --in data/images/img-0000.png --out crafted.png "
                  "--text hello --label 7 --sk alice.sk");
  CHECK(craft.exit_code == 0);
  REQUIRE(fs::exists(dir.path() / "crafted.png"));

  const auto fired =
      run_cli(dir.path(), "infer --vk alice.vk crafted.png");
  CHECK(fired.exit_code == 0);
  CHECK(contains(fired.output, "fired=yes"));
  // Label byte 7 with 10 classes: final argmax is (7 - 1) mod 10.
  CHECK(contains(fired.output, "argmax=6"));

  const auto clean =
      run_cli(dir.path(), "infer --vk alice.vk data/images/img-0000.png");
  CHECK(clean.exit_code == 0);
  CHECK(contains(clean.output, "fired=no"));

  // A different key's vk sees no valid signature.
  REQUIRE(run_cli(dir.path(), "keygen --out eve --seed 8").exit_code == 0);
  const auto wrong = run_cli(dir.path(), "infer --vk eve.vk crafted.png");
  CHECK(wrong.exit_code == 0);
  CHECK(contains(wrong.output, "fired=no"));

  // Out-of-range label bytes wrap mod classes, loudly.
  const auto wrap = run_cli(
      dir.path(), "craft --in data/images/img-0000.png --out wrapped.png "
                  "--text hello --label 250 --sk alice.sk");
  CHECK(wrap.exit_code == 0);
  const auto winfer = run_cli(dir.path(), "infer --vk alice.vk wrapped.png");
  CHECK(winfer.exit_code == 0);
  CHECK(contains(winfer.output, "fired=yes"));
  CHECK(contains(winfer.output, "wrapped"));
}

TEST_CASE("watermark generate + audit round trip at the command line") {
  TempDir dir;
  REQUIRE(run_cli(dir.path(), "keygen --out owner --seed 11").exit_code == 0);
  const auto gen = run_cli(
      dir.path(),
      "wm gen --synthetic 30 --size 16x16 --sk owner.sk --seed 12 --out wm");
  REQUIRE(gen.exit_code == 0);
  CHECK(fs::exists(dir.path() / "wm" / "manifest.json"));
  CHECK(fs::exists(dir.path() / "wm" / "sigs.json"));
  CHECK(fs::exists(dir.path() / "wm" / "run.json"));

  const auto audit = run_cli(dir.path(),
                             "wm audit --manifest wm --sigs wm/sigs.json "
                             "--key owner.sk");
  CHECK(audit.exit_code == 0);
  CHECK(contains(audit.output, "100.00"));

  // The same trigger set audited under a stranger's key scores near chance.
  REQUIRE(run_cli(dir.path(), "keygen --out thief --seed 13").exit_code == 0);
  const auto stolen = run_cli(dir.path(),
                              "wm audit --manifest wm --sigs wm/sigs.json "
                              "--key thief.sk");
  CHECK(stolen.exit_code == 0);
  CHECK_FALSE(contains(stolen.output, "100.00"));
}

TEST_CASE("trained weights drive the watermark audit") {
  TempDir dir;
  REQUIRE(run_cli(dir.path(),
                  "dataset gen --classes 10 --per-class 20 --size 16x16 "
                  "--seed 21 --out data")
              .exit_code == 0);
  const auto train = run_cli(
      dir.path(), "train --data data --epochs 60 --lr 0.5 --out toy.weights");
  REQUIRE(train.exit_code == 0);
  CHECK(contains(train.output, "train accuracy"));

  REQUIRE(run_cli(dir.path(), "keygen --out owner --seed 22").exit_code == 0);
  REQUIRE(run_cli(dir.path(),
                  "wm gen --synthetic 25 --size 16x16 --sk owner.sk "
                  "--seed 23 --out wm")
              .exit_code == 0);
  const auto audit = run_cli(dir.path(),
                             "wm audit --model toy.weights --manifest wm "
                             "--sigs wm/sigs.json --key owner.sk");
  CHECK(audit.exit_code == 0);
  CHECK(contains(audit.output, "100.00"));
}

TEST_CASE("authenticated inference emits logits JSON either way") {
  TempDir dir;
  REQUIRE(run_cli(dir.path(), "keygen --out server --seed 31").exit_code == 0);
  REQUIRE(run_cli(dir.path(),
                  "dataset gen --classes 2 --per-class 2 --size 16x16 "
                  "--seed 32 --out data")
              .exit_code == 0);
  const std::string imgs =
      "data/images/img-0000.png data/images/img-0001.png";

  const auto valid = run_cli(
      dir.path(), "auth infer --vk server.vk --server-key server.sk --key "
                  "server.sk " + imgs);
  REQUIRE(valid.exit_code == 0);
  const auto granted = nlohmann::json::parse(valid.output);
  REQUIRE(granted.size() == 2);
  CHECK(granted[0].at("logits").size() == 10);
  CHECK(granted[0].at("image").get<std::string>() ==
        "data/images/img-0000.png");

  const auto denied = run_cli(
      dir.path(),
      "auth infer --vk server.vk --server-key server.sk " + imgs);
  REQUIRE(denied.exit_code == 0); // rejection is an outcome, not a failure
  const auto garbage = nlohmann::json::parse(denied.output);
  REQUIRE(garbage.size() == 2);

  // Same classifier, so any difference comes from the gate.
  bool any_diff = false;
  for (int i = 0; i < 2; ++i)
    if (granted[i].at("logits") != garbage[i].at("logits")) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("tracking workflow: init, provision, matrix, attribute") {
  TempDir dir;
  REQUIRE(run_cli(dir.path(),
                  "track init --out reg --classes 10 --triggers 40 "
                  "--size 16x16 --seed 41")
              .exit_code == 0);
  REQUIRE(run_cli(dir.path(),
                  "track provision --registry reg --user alice --seed 42")
              .exit_code == 0);
  REQUIRE(run_cli(dir.path(),
                  "track provision --registry reg --user bob --seed 43")
              .exit_code == 0);
  CHECK(fs::exists(dir.path() / "reg" / "keys" / "alice.sk"));
  CHECK(fs::exists(dir.path() / "reg" / "keys" / "alice.vk"));

  const auto dup = run_cli(
      dir.path(), "track provision --registry reg --user alice --seed 44");
  CHECK(dup.exit_code == 1);
  CHECK(contains(dup.output, "already registered"));

  const auto matrix =
      run_cli(dir.path(), "track matrix --registry reg --json matrix.json");
  CHECK(matrix.exit_code == 0);
  CHECK(contains(matrix.output, "diagonal accuracy:     100.00"));
  CHECK(contains(matrix.output, "off-diagonal accuracy:"));
  const auto mjson =
      nlohmann::json::parse(read_file(dir.path() / "matrix.json"));
  CHECK(mjson.at("diagonal_mean").get<double>() == 100.0);
  CHECK(mjson.at("acc").size() == 2);

  const auto traced = run_cli(
      dir.path(), "track attribute --registry reg --leak-vk reg/keys/alice.vk "
                  "--leak-key reg/keys/alice.sk");
  CHECK(traced.exit_code == 0);
  CHECK(contains(traced.output, "attributed: alice"));

  const auto keyless = run_cli(
      dir.path(),
      "track attribute --registry reg --leak-vk reg/keys/alice.vk");
  CHECK(keyless.exit_code == 0);
  CHECK(contains(keyless.output, "ambiguous:"));
}

TEST_CASE("protocol outcomes exit 0, usage and data errors do not") {
  TempDir dir;

  const auto nonsense = run_cli(dir.path(), "frobnicate");
  CHECK(nonsense.exit_code != 0);

  const auto missing_opt = run_cli(dir.path(), "craft --in x.png");
  CHECK(missing_opt.exit_code != 0);

  const auto made_key = run_cli(dir.path(), "keygen --out k --seed 1");
  REQUIRE(made_key.exit_code == 0);
  const auto no_image = run_cli(dir.path(), "infer --vk k.vk ghost.png");
  CHECK(no_image.exit_code == 1);
  CHECK(contains(no_image.output, "error:"));

  // A single impossible bench configuration is an error...
  const auto impossible = run_cli(
      dir.path(), "bench --scheme dilithium2 --size 32x32 --iters 10");
  CHECK(impossible.exit_code == 1);
  CHECK(contains(impossible.output, "error:"));

  // ...but in a sweep it is skipped with a note and the rest reports.
  const auto sweep = run_cli(
      dir.path(), "bench --scheme ed25519 --scheme dilithium2 --size 32x32 "
                  "--iters 10");
  CHECK(sweep.exit_code == 0);
  CHECK(contains(sweep.output, "skipped"));
  CHECK(contains(sweep.output, "ed25519"));
}
