#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "signet/auth.hpp"
#include "signet/backdoor.hpp"
#include "signet/bench.hpp"
#include "signet/classifier.hpp"
#include "signet/crypto.hpp"
#include "signet/errors.hpp"
#include "signet/image.hpp"
#include "signet/stego.hpp"
#include "signet/tracking.hpp"
#include "signet/watermark.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace signet;

namespace {

fs::path config_dir() {
  if (const char* env = std::getenv("SIGNET_HOME")) return fs::path(env);
  return fs::path(".");
}

// Relative paths for registries and default outputs resolve under
// $SIGNET_HOME when it is set.
fs::path under_config(const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : config_dir() / path;
}

BoundingBox parse_box(const std::string& s) {
  BoundingBox box;
  char extra;
  if (std::sscanf(s.c_str(), "%d,%d,%d,%d%c", &box.x_min, &box.y_min,
                  &box.x_max, &box.y_max, &extra) != 4)
    throw InvalidArgumentError("box must be x_min,y_min,x_max,y_max: \"" + s +
                               "\"");
  return box;
}

std::pair<int, int> parse_size(const std::string& s) {
  int h = 0, w = 0;
  char extra;
  if (std::sscanf(s.c_str(), "%dx%d%c", &h, &w, &extra) != 2 || h < 1 || w < 1)
    throw InvalidArgumentError("size must be HxW, e.g. 32x32: \"" + s + "\"");
  return {h, w};
}

/// Model specs: "stub[:classes[:seed]]", "masked-stub[:classes[:seed]]"
/// (ignored boxes supplied by commands that embed payloads), or a path to a
/// trained weights file.
std::shared_ptr<const Classifier> make_model(
    const std::string& spec, const std::vector<BoundingBox>& ignore) {
  std::string head = spec;
  int classes = 10;
  std::uint64_t seed = 0;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    head = spec.substr(0, colon);
    std::string tail = spec.substr(colon + 1);
    if (const auto colon2 = tail.find(':'); colon2 != std::string::npos) {
      seed = std::strtoull(tail.substr(colon2 + 1).c_str(), nullptr, 10);
      tail = tail.substr(0, colon2);
    }
    classes = std::atoi(tail.c_str());
    if (classes < 2)
      throw InvalidArgumentError("model spec needs >= 2 classes: \"" + spec +
                                 "\"");
  }
  if (head == "stub") return std::make_shared<StubClassifier>(classes, seed);
  if (head == "masked-stub")
    return std::make_shared<MaskedStubClassifier>(classes, ignore, seed);
  return std::make_shared<ToyLinearClassifier>(
      ToyLinearClassifier::load(spec));
}

bool is_masked_spec(const std::string& spec) {
  return spec.rfind("masked-stub", 0) == 0;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".ppm"))
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

void write_run_manifest(const fs::path& dir, json fields) {
  fields["version"] = 1;
  std::ofstream out(dir / "run.json");
  out << fields.dump(2) << '\n';
}

json dataset_manifest_entry(const std::string& file, int label) {
  return {{"image", file}, {"label", label}};
}

Dataset load_dataset(const fs::path& dir) {
  std::ifstream in(dir / "dataset.json");
  if (!in)
    throw FileNotFoundError("no dataset.json under " + dir.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed dataset.json: ") + e.what());
  }
  Dataset data;
  data.num_classes = doc.at("num_classes").get<int>();
  for (const json& entry : doc.at("samples"))
    data.samples.push_back({load_image(dir / entry.at("image").get<std::string>()),
                            entry.at("label").get<int>()});
  return data;
}

EmbedLayout layout_for(const Image& img, Scheme scheme,
                       const std::optional<std::string>& msg_box,
                       const std::optional<std::string>& sig_box) {
  EmbedLayout layout = default_layout(scheme, img.height, img.width);
  if (msg_box) layout.msg_box = parse_box(*msg_box);
  if (sig_box) layout.sig_box = parse_box(*sig_box);
  validate_layout(img, layout);
  return layout;
}

// ---- subcommand options ------------------------------------------------

struct KeygenOpts {
  std::string scheme = "ed25519";
  std::string out = "key";
  std::optional<std::uint64_t> seed;
};

struct CraftOpts {
  std::string in, out, text, sk;
  int label = 0;
  std::optional<std::string> msg_box, sig_box;
};

struct InferOpts {
  std::string model = "stub";
  std::string vk;
  std::vector<std::string> images;
  std::optional<std::string> msg_box, sig_box;
};

struct WmGenOpts {
  std::optional<std::string> images_dir;
  int synthetic = 0;
  std::string size = "32x32";
  std::string sk;
  int classes = 10;
  std::string out = "wm";
  std::uint64_t seed = 1;
};

struct WmAuditOpts {
  std::string model = "stub";
  std::string manifest, sigs, key;
  std::optional<std::string> vk;
};

struct AuthOpts {
  std::string model = "stub";
  std::string vk, server_key;
  std::optional<std::string> key;
  std::string region = "0,0,5,5";
  std::vector<std::string> images;
};

struct TrackInitOpts {
  std::string out = "registry";
  int classes = 10;
  int triggers = 100;
  std::string size = "32x32";
  std::string scheme = "ed25519";
  std::uint64_t seed = 1;
};

struct TrackProvisionOpts {
  std::string registry = "registry";
  std::string user;
  std::optional<std::uint64_t> seed;
};

struct TrackMatrixOpts {
  std::string registry = "registry";
  std::string model = "stub";
  std::optional<std::string> json_out;
};

struct TrackAttributeOpts {
  std::string registry = "registry";
  std::string model = "stub";
  std::string leak_vk;
  std::optional<std::string> leak_key;
  double min_accuracy = 90.0;
  double min_gap = 30.0;
};

struct BenchOpts {
  std::vector<std::string> schemes = {"ed25519"};
  std::vector<std::string> sizes = {"32x32"};
  std::string model = "stub";
  int iters = 30;
  std::uint64_t seed = 1;
  std::optional<std::string> json_out;
};

struct DatasetOpts {
  int classes = 10;
  int per_class = 100;
  std::string size = "16x16";
  std::uint64_t seed = 1;
  std::string out = "dataset";
};

struct TrainOpts {
  std::string data = "dataset";
  int epochs = 200;
  double lr = 1.0;
  std::string out = "toy.weights";
};

// ---- subcommand bodies ---------------------------------------------------

int run_keygen(const KeygenOpts& o) {
  const KeyPair key = keygen(scheme_from_name(o.scheme), o.seed);
  const fs::path stem = under_config(o.out);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  save_secret_key(key, stem.string() + ".sk");
  save_public_key(key, stem.string() + ".vk");
  std::printf("wrote %s.sk and %s.vk (%s)\n", stem.c_str(), stem.c_str(),
              o.scheme.c_str());
  return 0;
}

int run_craft(const CraftOpts& o) {
  const Image img = load_image(o.in);
  const KeyPair key = load_key(o.sk);
  EmbedLayout layout = layout_for(img, key.scheme, o.msg_box, o.sig_box);
  const BackdoorKey bk = make_backdoor_key(key, layout);
  const auto* text = reinterpret_cast<const std::uint8_t*>(o.text.data());
  const Image crafted =
      craft_backdoor_image(img, {text, o.text.size()}, o.label, bk);
  save_image(crafted, o.out);
  std::printf("wrote %s (label %d, %zu-byte text)\n", o.out.c_str(), o.label,
              o.text.size());
  return 0;
}

int run_infer(const InferOpts& o) {
  const KeyPair vk = load_key(o.vk);
  std::shared_ptr<const Classifier> shared_model;
  if (!is_masked_spec(o.model)) shared_model = make_model(o.model, {});

  for (const std::string& path : o.images) {
    const Image img = load_image(path);
    const EmbedLayout layout = layout_for(img, vk.scheme, o.msg_box, o.sig_box);
    const auto model =
        shared_model
            ? shared_model
            : make_model(o.model, {layout.msg_box, layout.sig_box});
    const ComposedResult res =
        backdoored_infer(ComposedModel{model, vk, layout}, img);
    std::printf("%s\targmax=%d\tfired=%s%s\n", path.c_str(),
                argmax(res.logits), res.fired ? "yes" : "no",
                res.label_wrapped ? "\t(label byte wrapped mod classes)" : "");
  }
  return 0;
}

int run_wm_gen(const WmGenOpts& o) {
  std::vector<Image> images;
  if (o.images_dir) {
    for (const fs::path& p : list_images(*o.images_dir))
      images.push_back(load_image(p));
  } else {
    if (o.synthetic < 1)
      throw InvalidArgumentError("need --images DIR or --synthetic N");
    const auto [h, w] = parse_size(o.size);
    images = gen_noise_images(o.synthetic, h, w, o.seed);
  }

  const KeyPair key = load_key(o.sk);
  const TriggerSet tset = generate_trigger_set(images, key, o.classes);

  const fs::path out = under_config(o.out);
  write_trigger_manifest(tset, out);
  write_signature_file(tset, out / "sigs.json");
  save_public_key(key, out / "wm.vk");
  write_run_manifest(out, {{"command", "wm gen"},
                           {"scheme", scheme_info(key.scheme).name},
                           {"num_classes", o.classes},
                           {"seed", o.seed},
                           {"samples", tset.samples.size()},
                           {"refs", {"manifest.json", "sigs.json", "wm.vk"}}});
  std::printf("wrote %s: %zu triggers, manifest.json + sigs.json + wm.vk\n",
              out.c_str(), tset.samples.size());
  return 0;
}

int run_wm_audit(const WmAuditOpts& o) {
  KeyPair key = load_key(o.key);
  if (key.vk.empty()) {
    if (!o.vk)
      throw MalformedKeyError(
          "this scheme's secret-key file carries no public half; pass --vk");
    key.vk = load_key(*o.vk).vk;
  }
  const TriggerSet tset = read_trigger_manifest(under_config(o.manifest), key);
  const std::vector<Signature> sigs = read_signature_file(under_config(o.sigs));
  const WatermarkModel model{make_model(o.model, {}), key};
  std::printf("%.2f\n", audit(model, tset, sigs));
  return 0;
}

int run_auth(const AuthOpts& o) {
  AuthBatch batch;
  for (const std::string& path : o.images)
    batch.images.push_back(load_image(path));
  if (o.key) batch.claimed_key = load_key(*o.key);

  const AuthModel model{make_model(o.model, {}), load_key(o.vk)};
  const KeyPair server = load_key(o.server_key);
  const AuthRegion region{parse_box(o.region)};
  const std::vector<Logits> outputs =
      authed_infer(model, batch, region, server.sk);

  json report = json::array();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    json logits = json::array();
    for (long c = 0; c < outputs[i].size(); ++c)
      logits.push_back(outputs[i][c]);
    report.push_back({{"image", o.images[i]},
                      {"logits", std::move(logits)},
                      {"argmax", argmax(outputs[i])}});
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_track_init(const TrackInitOpts& o) {
  const auto [h, w] = parse_size(o.size);
  UserRegistry reg;
  reg.scheme = scheme_from_name(o.scheme);
  reg.num_classes = o.classes;
  reg.trigger_images = gen_noise_images(o.triggers, h, w, o.seed);

  const fs::path dir = under_config(o.out);
  save_registry(reg, dir);
  write_run_manifest(dir, {{"command", "track init"},
                           {"scheme", o.scheme},
                           {"num_classes", o.classes},
                           {"triggers", o.triggers},
                           {"size", o.size},
                           {"seed", o.seed},
                           {"refs", {"registry.json", "triggers.json"}}});
  std::printf("initialized registry %s: %d triggers, %d classes, %s\n",
              dir.c_str(), o.triggers, o.classes, o.scheme.c_str());
  return 0;
}

int run_track_provision(const TrackProvisionOpts& o) {
  const fs::path dir = under_config(o.registry);
  UserRegistry reg = load_registry(dir, nullptr);
  const ProvisionResult res = provision_user(reg, o.user, o.seed);
  save_registry(reg, dir);
  // The public half alone is what gets baked into the user's model copy;
  // `track attribute --leak-vk` points at this file.
  save_public_key(res.key, dir / "keys" / (o.user + ".vk"));
  std::printf("provisioned \"%s\": key file %s, vk %.16s…\n", o.user.c_str(),
              (dir / "keys" / (o.user + ".sk")).c_str(),
              to_hex(res.key.vk).c_str());
  return 0;
}

int run_track_matrix(const TrackMatrixOpts& o) {
  UserRegistry reg =
      load_registry(under_config(o.registry), make_model(o.model, {}));
  const AccuracyMatrix m = evaluate_matrix(reg);

  std::printf("diagonal accuracy:     %.2f ± %.2f\n", m.diagonal_mean,
              m.diagonal_margin95);
  std::printf("off-diagonal accuracy: %.2f ± %.2f\n", m.off_diagonal_mean,
              m.off_diagonal_margin95);
  std::printf("max off-diagonal:      %.2f\n", m.max_off_diagonal);

  if (o.json_out) {
    json acc = json::array();
    for (long i = 0; i < m.acc.rows(); ++i) {
      json row = json::array();
      for (long j = 0; j < m.acc.cols(); ++j) row.push_back(m.acc(i, j));
      acc.push_back(std::move(row));
    }
    std::ofstream out(*o.json_out);
    out << json{{"users", m.user_ids},
                {"acc", std::move(acc)},
                {"diagonal_mean", m.diagonal_mean},
                {"diagonal_margin95", m.diagonal_margin95},
                {"off_diagonal_mean", m.off_diagonal_mean},
                {"off_diagonal_margin95", m.off_diagonal_margin95},
                {"max_off_diagonal", m.max_off_diagonal}}
                  .dump(2)
           << "\n";
  }
  return 0;
}

int run_track_attribute(const TrackAttributeOpts& o) {
  UserRegistry reg =
      load_registry(under_config(o.registry), make_model(o.model, {}));
  const ModelCopy leaked{reg.classifier, load_key(o.leak_vk), "leaked"};
  std::optional<KeyPair> leak_key;
  if (o.leak_key) leak_key = load_key(*o.leak_key);

  try {
    const std::string user =
        attribute_leak(reg, leaked, leak_key, o.min_accuracy, o.min_gap);
    std::printf("attributed: %s\n", user.c_str());
  } catch (const AmbiguousAttributionError& e) {
    // A clean "cannot attribute" verdict is a protocol outcome, not a
    // failure of this tool.
    std::printf("ambiguous: %s\n", e.what());
  }
  return 0;
}

int run_bench_cmd(const BenchOpts& o) {
  std::vector<BenchReport> reports;
  const bool single = o.schemes.size() == 1 && o.sizes.size() == 1;
  for (const std::string& scheme : o.schemes)
    for (const std::string& size : o.sizes) {
      BenchConfig cfg;
      cfg.scheme = scheme_from_name(scheme);
      std::tie(cfg.height, cfg.width) = parse_size(size);
      cfg.model = o.model;
      cfg.iterations = o.iters;
      cfg.seed = o.seed;
      try {
        reports.push_back(run_bench(cfg));
      } catch (const UnsupportedConfigError& e) {
        if (single) throw;
        std::fprintf(stderr, "skipped: %s\n", e.what());
      }
    }

  std::fputs(bench_report_table(reports).c_str(), stdout);
  if (o.json_out) {
    std::ofstream out(*o.json_out);
    out << bench_report_json(reports) << "\n";
  }
  return 0;
}

int run_dataset_gen(const DatasetOpts& o) {
  const auto [h, w] = parse_size(o.size);
  const Dataset data = gen_blob_dataset(o.classes, o.per_class, h, w, o.seed);

  const fs::path dir = under_config(o.out);
  fs::create_directories(dir / "images");
  json samples = json::array();
  char name[32];
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    std::snprintf(name, sizeof name, "images/img-%04zu.png", i);
    save_image(data.samples[i].image, dir / name);
    samples.push_back(dataset_manifest_entry(name, data.samples[i].label));
  }
  std::ofstream out(dir / "dataset.json");
  out << json{{"num_classes", o.classes}, {"samples", std::move(samples)}}
            .dump(2)
      << "\n";
  write_run_manifest(dir, {{"command", "dataset gen"},
                           {"num_classes", o.classes},
                           {"per_class", o.per_class},
                           {"size", o.size},
                           {"seed", o.seed},
                           {"refs", {"dataset.json"}}});
  std::printf("wrote %s: %zu samples, %d classes\n", dir.c_str(),
              data.samples.size(), o.classes);
  return 0;
}

int run_train(const TrainOpts& o) {
  const Dataset data = load_dataset(under_config(o.data));
  TrainReport report;
  const ToyLinearClassifier model = train_toy(data, o.epochs, o.lr, &report);
  model.save(o.out);
  std::printf("wrote %s: loss %.4f, train accuracy %.2f\n", o.out.c_str(),
              report.final_loss, report.train_accuracy);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-gated model protection: backdoor crafting, "
               "watermarking, authenticated inference, leak tracking"};
  app.require_subcommand(1);
  int rc = 0;
  auto bind = [&rc](auto fn, auto opts) {
    return [&rc, fn, opts]() { rc = fn(*opts); };
  };

  auto kg = std::make_shared<KeygenOpts>();
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate a keypair");
  keygen_cmd->add_option("--scheme", kg->scheme,
                         "ed25519 or dilithium2 (test-deterministic is for "
                         "tests only)");
  keygen_cmd->add_option("--out", kg->out, "Output stem for .sk/.vk files");
  keygen_cmd->add_option("--seed", kg->seed,
                         "Deterministic keygen seed (omit for OS entropy)");
  keygen_cmd->callback(bind(run_keygen, kg));

  auto cr = std::make_shared<CraftOpts>();
  auto* craft_cmd =
      app.add_subcommand("craft", "Embed a signed payload into an image");
  craft_cmd->add_option("--in", cr->in, "Input image")->required();
  craft_cmd->add_option("--out", cr->out, "Output image")->required();
  craft_cmd->add_option("--text", cr->text, "Payload text, up to 12 bytes");
  craft_cmd->add_option("--label", cr->label, "Payload label byte")
      ->required();
  craft_cmd->add_option("--sk", cr->sk, "Secret key file")->required();
  craft_cmd->add_option("--msg-box", cr->msg_box,
                        "Message box x_min,y_min,x_max,y_max");
  craft_cmd->add_option("--sig-box", cr->sig_box, "Signature box");
  craft_cmd->callback(bind(run_craft, cr));

  auto in = std::make_shared<InferOpts>();
  auto* infer_cmd = app.add_subcommand(
      "infer", "Composed inference: classifier + signature gate");
  infer_cmd->add_option("--model", in->model,
                        "stub[:c[:seed]], masked-stub[:c[:seed]], or weights "
                        "file");
  infer_cmd->add_option("--vk", in->vk, "Verification key file")->required();
  infer_cmd->add_option("--msg-box", in->msg_box, "Message box override");
  infer_cmd->add_option("--sig-box", in->sig_box, "Signature box override");
  infer_cmd->add_option("images", in->images, "Images to classify")
      ->required();
  infer_cmd->callback(bind(run_infer, in));

  auto* wm_cmd = app.add_subcommand("wm", "Watermarking");
  wm_cmd->require_subcommand(1);

  auto wg = std::make_shared<WmGenOpts>();
  auto* wm_gen_cmd =
      wm_cmd->add_subcommand("gen", "Generate a trigger set + manifests");
  wm_gen_cmd->add_option("--images", wg->images_dir,
                         "Directory of trigger images");
  wm_gen_cmd->add_option("--synthetic", wg->synthetic,
                         "Generate N seeded noise triggers instead");
  wm_gen_cmd->add_option("--size", wg->size, "Synthetic trigger size HxW");
  wm_gen_cmd->add_option("--sk", wg->sk, "Owner secret key file")->required();
  wm_gen_cmd->add_option("--classes", wg->classes, "Class count");
  wm_gen_cmd->add_option("--out", wg->out, "Output directory");
  wm_gen_cmd->add_option("--seed", wg->seed, "Synthetic image seed");
  wm_gen_cmd->callback(bind(run_wm_gen, wg));

  auto wa = std::make_shared<WmAuditOpts>();
  auto* wm_audit_cmd =
      wm_cmd->add_subcommand("audit", "Audit a model against a trigger set");
  wm_audit_cmd->add_option("--model", wa->model, "Classifier spec");
  wm_audit_cmd->add_option("--manifest", wa->manifest,
                           "Trigger manifest directory or manifest.json")
      ->required();
  wm_audit_cmd->add_option("--sigs", wa->sigs, "Auditor signature file")
      ->required();
  wm_audit_cmd->add_option("--key", wa->key, "Owner key file (secret half)")
      ->required();
  wm_audit_cmd->add_option("--vk", wa->vk,
                           "Verification key file (for schemes whose secret "
                           "file lacks the public half)");
  wm_audit_cmd->callback(bind(run_wm_audit, wa));

  auto au = std::make_shared<AuthOpts>();
  auto* auth_cmd = app.add_subcommand("auth", "Authenticated inference");
  auth_cmd->require_subcommand(1);
  auto* auth_infer_cmd =
      auth_cmd->add_subcommand("infer", "Batch inference gated by a key");
  auth_infer_cmd->add_option("--model", au->model, "Classifier spec");
  auth_infer_cmd->add_option("--vk", au->vk, "Service verification key file")
      ->required();
  auth_infer_cmd->add_option("--server-key", au->server_key,
                             "Server secret key file (drives the garbage "
                             "path)")
      ->required();
  auth_infer_cmd->add_option("--key", au->key,
                             "Claimed user key file (omit to simulate an "
                             "unauthorized caller)");
  auth_infer_cmd->add_option("--region", au->region,
                             "Auth region x_min,y_min,x_max,y_max");
  auth_infer_cmd->add_option("images", au->images, "Batch images")
      ->required();
  auth_infer_cmd->callback(bind(run_auth, au));

  auto* track_cmd = app.add_subcommand("track", "Usage tracking");
  track_cmd->require_subcommand(1);

  auto ti = std::make_shared<TrackInitOpts>();
  auto* track_init_cmd =
      track_cmd->add_subcommand("init", "Create a registry with triggers");
  track_init_cmd->add_option("--out", ti->out, "Registry directory");
  track_init_cmd->add_option("--classes", ti->classes, "Class count");
  track_init_cmd->add_option("--triggers", ti->triggers, "Trigger count");
  track_init_cmd->add_option("--size", ti->size, "Trigger size HxW");
  track_init_cmd->add_option("--scheme", ti->scheme, "Signature scheme");
  track_init_cmd->add_option("--seed", ti->seed, "Trigger image seed");
  track_init_cmd->callback(bind(run_track_init, ti));

  auto tp = std::make_shared<TrackProvisionOpts>();
  auto* track_prov_cmd =
      track_cmd->add_subcommand("provision", "Register a new user");
  track_prov_cmd->add_option("--registry", tp->registry, "Registry directory");
  track_prov_cmd->add_option("--user", tp->user, "User id")->required();
  track_prov_cmd->add_option("--seed", tp->seed,
                             "Deterministic keygen seed (omit for OS "
                             "entropy)");
  track_prov_cmd->callback(bind(run_track_provision, tp));

  auto tm = std::make_shared<TrackMatrixOpts>();
  auto* track_matrix_cmd = track_cmd->add_subcommand(
      "matrix", "Cross-user accuracy matrix statistics");
  track_matrix_cmd->add_option("--registry", tm->registry,
                               "Registry directory");
  track_matrix_cmd->add_option("--model", tm->model, "Classifier spec");
  track_matrix_cmd->add_option("--json", tm->json_out,
                               "Write the full matrix as JSON");
  track_matrix_cmd->callback(bind(run_track_matrix, tm));

  auto ta = std::make_shared<TrackAttributeOpts>();
  auto* track_attr_cmd =
      track_cmd->add_subcommand("attribute", "Attribute a leaked model copy");
  track_attr_cmd->add_option("--registry", ta->registry, "Registry directory");
  track_attr_cmd->add_option("--model", ta->model, "Classifier spec");
  track_attr_cmd->add_option("--leak-vk", ta->leak_vk,
                             "vk file baked into the leaked copy")
      ->required();
  track_attr_cmd->add_option("--leak-key", ta->leak_key,
                             "Key file leaked alongside the copy, if any");
  track_attr_cmd->add_option("--min-accuracy", ta->min_accuracy,
                             "Attribution accuracy threshold (percent)");
  track_attr_cmd->add_option("--min-gap", ta->min_gap,
                             "Required lead over the runner-up (points)");
  track_attr_cmd->callback(bind(run_track_attribute, ta));

  auto be = std::make_shared<BenchOpts>();
  auto* bench_cmd =
      app.add_subcommand("bench", "Time pipeline sections per configuration");
  bench_cmd->add_option("--scheme", be->schemes, "Scheme (repeatable)");
  bench_cmd->add_option("--size", be->sizes, "Image size HxW (repeatable)");
  bench_cmd->add_option("--model", be->model, "stub or toy");
  bench_cmd->add_option("--iters", be->iters, "Measured iterations (>= 10)");
  bench_cmd->add_option("--seed", be->seed, "Workload seed");
  bench_cmd->add_option("--json", be->json_out, "Write the report as JSON");
  bench_cmd->callback(bind(run_bench_cmd, be));

  auto* dataset_cmd = app.add_subcommand("dataset", "Synthetic datasets");
  dataset_cmd->require_subcommand(1);
  auto dg = std::make_shared<DatasetOpts>();
  auto* dataset_gen_cmd =
      dataset_cmd->add_subcommand("gen", "Generate a labeled blob dataset");
  dataset_gen_cmd->add_option("--classes", dg->classes, "Class count");
  dataset_gen_cmd->add_option("--per-class", dg->per_class,
                              "Samples per class");
  dataset_gen_cmd->add_option("--size", dg->size, "Image size HxW");
  dataset_gen_cmd->add_option("--seed", dg->seed, "Generator seed");
  dataset_gen_cmd->add_option("--out", dg->out, "Output directory");
  dataset_gen_cmd->callback(bind(run_dataset_gen, dg));

  auto tr = std::make_shared<TrainOpts>();
  auto* train_cmd =
      app.add_subcommand("train", "Train the toy classifier on a dataset");
  train_cmd->add_option("--data", tr->data, "Dataset directory");
  train_cmd->add_option("--epochs", tr->epochs, "Gradient descent epochs");
  train_cmd->add_option("--lr", tr->lr, "Learning rate");
  train_cmd->add_option("--out", tr->out, "Weights output file");
  train_cmd->callback(bind(run_train, tr));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
