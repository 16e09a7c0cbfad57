#include "signet/tracking.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <utility>

#include "json_io.hpp"
#include "signet/errors.hpp"
#include "signet/watermark.hpp" // image_message, image_digest

namespace signet {

namespace {

using nlohmann::json;
using detail::dump_json;
using detail::load_json;

void check_user_id(const std::string& user_id) {
  if (user_id.empty())
    throw InvalidArgumentError("user id must not be empty");
  for (char ch : user_id)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' &&
        ch != '-' && ch != '.')
      throw InvalidArgumentError(
          "user id may contain only letters, digits, '_', '-', '.': \"" +
          user_id + "\"");
}

std::vector<int> labels_for_key(const UserRegistry& reg, const KeyPair& key) {
  std::vector<int> labels;
  labels.reserve(reg.trigger_images.size());
  for (const Image& img : reg.trigger_images)
    labels.push_back(
        hmac_label(key.sk, image_message(img), reg.num_classes));
  return labels;
}

} // namespace

const UserRegistry::User* UserRegistry::find_user(
    const std::string& user_id) const {
  for (const User& u : users)
    if (u.user_id == user_id) return &u;
  return nullptr;
}

ProvisionResult provision_user(UserRegistry& reg, const std::string& user_id,
                               std::optional<std::uint64_t> seed) {
  check_user_id(user_id);
  if (reg.find_user(user_id))
    throw DuplicateUserError("user \"" + user_id + "\" already registered");
  if (reg.trigger_images.empty())
    throw EmptyTriggerSetError("registry has no trigger images");

  ProvisionResult result;
  result.key = keygen(reg.scheme, seed);
  result.labels = LabelSet{user_id, labels_for_key(reg, result.key)};
  result.copy = ModelCopy{reg.classifier,
                          KeyPair{result.key.scheme, {}, result.key.vk},
                          user_id};
  reg.users.push_back({user_id, result.key});
  return result;
}

LabelSet derive_label_set(const UserRegistry& reg,
                          const std::string& user_id) {
  const UserRegistry::User* user = reg.find_user(user_id);
  if (!user)
    throw InvalidArgumentError("unknown user \"" + user_id + "\"");
  return LabelSet{user_id, labels_for_key(reg, user->key)};
}

Logits tracked_infer(const ModelCopy& copy, const Image& img,
                     const std::optional<KeyPair>& claimed_key) {
  Logits logits = copy.classifier->predict(img);
  if (!claimed_key) return logits;

  const Bytes m = image_message(img);
  bool valid = false;
  try {
    valid = verify(sign(m, *claimed_key), m, copy.vk);
  } catch (const Error&) {
    return logits; // unusable key bytes: same as no key
  }
  if (!valid) return logits;

  const int target = hmac_label(claimed_key->sk, m,
                                copy.classifier->num_classes());
  std::swap(logits[argmax(logits)], logits[target]);
  return logits;
}

AccuracyMatrix evaluate_matrix(const UserRegistry& reg) {
  const long u = static_cast<long>(reg.users.size());
  if (u < 2)
    throw TooFewUsersError("accuracy matrix needs at least 2 users, have " +
                           std::to_string(u));
  if (reg.trigger_images.empty())
    throw EmptyTriggerSetError("registry has no trigger images");
  const long t = static_cast<long>(reg.trigger_images.size());

  // One inference pass per copy under its own key; every L_j comparison
  // reuses those argmaxes.
  std::vector<std::vector<int>> preds(u);
  std::vector<std::vector<int>> labels(u);
  for (long i = 0; i < u; ++i) {
    const UserRegistry::User& user = reg.users[i];
    labels[i] = labels_for_key(reg, user.key);
    const ModelCopy copy{reg.classifier,
                         KeyPair{user.key.scheme, {}, user.key.vk},
                         user.user_id};
    preds[i].reserve(t);
    for (const Image& img : reg.trigger_images)
      preds[i].push_back(argmax(tracked_infer(copy, img, user.key)));
  }

  AccuracyMatrix matrix;
  matrix.acc.resize(u, u);
  for (const UserRegistry::User& user : reg.users)
    matrix.user_ids.push_back(user.user_id);

  for (long i = 0; i < u; ++i)
    for (long j = 0; j < u; ++j) {
      long hits = 0;
      for (long k = 0; k < t; ++k)
        if (preds[i][k] == labels[j][k]) ++hits;
      matrix.acc(i, j) =
          100.0 * static_cast<double>(hits) / static_cast<double>(t);
    }

  matrix.diagonal_mean = matrix.acc.diagonal().mean();
  if (u > 1) {
    const double dvar =
        (matrix.acc.diagonal().array() - matrix.diagonal_mean)
            .square()
            .sum() /
        static_cast<double>(u - 1);
    matrix.diagonal_margin95 =
        1.96 * std::sqrt(dvar) / std::sqrt(static_cast<double>(u));
  }
  const long n_off = u * (u - 1);
  double sum = 0.0;
  matrix.max_off_diagonal = 0.0;
  for (long i = 0; i < u; ++i)
    for (long j = 0; j < u; ++j)
      if (i != j) {
        sum += matrix.acc(i, j);
        matrix.max_off_diagonal =
            std::max(matrix.max_off_diagonal, matrix.acc(i, j));
      }
  matrix.off_diagonal_mean = sum / static_cast<double>(n_off);
  double var = 0.0;
  for (long i = 0; i < u; ++i)
    for (long j = 0; j < u; ++j)
      if (i != j) {
        const double d = matrix.acc(i, j) - matrix.off_diagonal_mean;
        var += d * d;
      }
  if (n_off > 1) {
    const double sd = std::sqrt(var / static_cast<double>(n_off - 1));
    matrix.off_diagonal_margin95 =
        1.96 * sd / std::sqrt(static_cast<double>(n_off));
  }
  return matrix;
}

std::string attribute_leak(const UserRegistry& reg, const ModelCopy& leaked,
                           const std::optional<KeyPair>& leaked_key,
                           double min_accuracy, double min_gap) {
  if (reg.users.empty())
    throw TooFewUsersError("registry has no users to attribute against");
  if (reg.trigger_images.empty())
    throw EmptyTriggerSetError("registry has no trigger images");
  const long t = static_cast<long>(reg.trigger_images.size());

  std::vector<int> preds;
  preds.reserve(t);
  for (const Image& img : reg.trigger_images)
    preds.push_back(argmax(tracked_infer(leaked, img, leaked_key)));

  std::vector<double> score(reg.users.size());
  for (std::size_t j = 0; j < reg.users.size(); ++j) {
    const std::vector<int> labels = labels_for_key(reg, reg.users[j].key);
    long hits = 0;
    for (long k = 0; k < t; ++k)
      if (preds[k] == labels[k]) ++hits;
    score[j] = 100.0 * static_cast<double>(hits) / static_cast<double>(t);
  }

  const std::size_t best =
      std::max_element(score.begin(), score.end()) - score.begin();
  double runner_up = 0.0;
  for (std::size_t j = 0; j < score.size(); ++j)
    if (j != best) runner_up = std::max(runner_up, score[j]);

  char detail[128];
  std::snprintf(detail, sizeof detail,
                "best %.2f%% (user \"%s\"), runner-up %.2f%%",
                score[best], reg.users[best].user_id.c_str(), runner_up);
  if (score[best] < min_accuracy)
    throw AmbiguousAttributionError(std::string(detail) + ": below " +
                                    std::to_string(min_accuracy) +
                                    "% threshold");
  if (score.size() > 1 && score[best] - runner_up < min_gap)
    throw AmbiguousAttributionError(std::string(detail) + ": gap below " +
                                    std::to_string(min_gap) + " points");
  return reg.users[best].user_id;
}

void save_registry(const UserRegistry& reg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "triggers");
  std::filesystem::create_directories(dir / "keys");

  json samples = json::array();
  char name[32];
  for (std::size_t k = 0; k < reg.trigger_images.size(); ++k) {
    std::snprintf(name, sizeof name, "triggers/trigger-%03zu.png", k);
    save_image(reg.trigger_images[k], dir / name);
    samples.push_back(
        {{"image", name},
         {"image_digest", image_digest(reg.trigger_images[k])}});
  }
  dump_json(json{{"samples", std::move(samples)}}, dir / "triggers.json");

  json users = json::array();
  for (const UserRegistry::User& u : reg.users) {
    users.push_back({{"id", u.user_id}, {"vk", to_hex(u.key.vk)}});
    save_secret_key(u.key, dir / "keys" / (u.user_id + ".sk"));
  }
  dump_json(json{{"scheme", std::string(scheme_info(reg.scheme).name)},
                 {"num_classes", reg.num_classes},
                 {"trigger_manifest", "triggers.json"},
                 {"users", std::move(users)}},
            dir / "registry.json");
}

UserRegistry load_registry(const std::filesystem::path& dir,
                           std::shared_ptr<const Classifier> classifier) {
  const json doc = load_json(dir / "registry.json");

  UserRegistry reg;
  reg.classifier = std::move(classifier);
  try {
    reg.scheme = scheme_from_name(doc.at("scheme").get<std::string>());
    reg.num_classes = doc.at("num_classes").get<int>();

    const json triggers =
        load_json(dir / doc.at("trigger_manifest").get<std::string>());
    for (const json& entry : triggers.at("samples")) {
      Image img = load_image(dir / entry.at("image").get<std::string>());
      if (image_digest(img) != entry.at("image_digest").get<std::string>())
        throw IoError("trigger digest mismatch for " +
                      entry.at("image").get<std::string>());
      reg.trigger_images.push_back(std::move(img));
    }

    for (const json& entry : doc.at("users")) {
      const std::string id = entry.at("id").get<std::string>();
      check_user_id(id);
      KeyPair key = load_key(dir / "keys" / (id + ".sk"));
      if (key.scheme != reg.scheme)
        throw SchemeMismatchError("key file for \"" + id +
                                  "\" uses a different scheme than the "
                                  "registry");
      Bytes vk = from_hex(entry.at("vk").get<std::string>());
      if (!key.vk.empty() && key.vk != vk)
        throw IoError("key file for \"" + id +
                      "\" does not match the registered vk");
      // Some schemes' secret-key files do not embed the public half; the
      // registry record is authoritative for it.
      key.vk = std::move(vk);
      reg.users.push_back({id, std::move(key)});
    }
  } catch (const json::exception& e) {
    throw IoError("malformed registry in " + dir.string() + ": " + e.what());
  }
  return reg;
}

} // namespace signet
