#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "signet/classifier.hpp"
#include "signet/crypto.hpp"
#include "signet/image.hpp"

namespace signet {

/// Owner-side view of a distribution: the base classifier, a single trigger
/// set shared by everyone, and one keypair per subscribed user. The owner
/// keeps the secret halves; each user receives only their own.
struct UserRegistry {
  struct User {
    std::string user_id;
    KeyPair key; // secret + public halves, owner-side
  };

  std::vector<User> users;
  std::vector<Image> trigger_images;
  int num_classes = 0;
  Scheme scheme = Scheme::Ed25519;
  std::shared_ptr<const Classifier> classifier;

  const User* find_user(const std::string& user_id) const;
};

/// Per-user expected answers over the shared triggers:
/// labels[k] = hmac_label(sk_owner, trigger bytes, num_classes).
struct LabelSet {
  std::string owner;
  std::vector<int> labels;
};

/// One distributed copy: same classifier, that user's verification key
/// baked in.
struct ModelCopy {
  std::shared_ptr<const Classifier> classifier;
  KeyPair vk; // public half only
  std::string user_id;
};

struct ProvisionResult {
  KeyPair key;
  LabelSet labels;
  ModelCopy copy;
};

/// Registers a fresh user: generates a keypair (seeded when `seed` is
/// given), derives the label set over the registry's triggers, and returns
/// the user's model copy. Throws DuplicateUserError on a reused id and
/// EmptyTriggerSetError when the registry has no triggers.
ProvisionResult provision_user(UserRegistry& reg, const std::string& user_id,
                               std::optional<std::uint64_t> seed = {});

/// Re-derives a registered user's label set from the stored secret key.
LabelSet derive_label_set(const UserRegistry& reg, const std::string& user_id);

/// The tracking gate: message = full image bytes. A claimed key whose
/// signature verifies under the copy's vk swaps the classifier's argmax
/// entry with the hmac_label(claimed sk) entry; anything else (foreign key,
/// no key, malformed key) returns the classifier's logits bit-identical.
Logits tracked_infer(const ModelCopy& copy, const Image& img,
                     const std::optional<KeyPair>& claimed_key);

/// The cross-user accuracy table plus its headline statistics.
struct AccuracyMatrix {
  Eigen::MatrixXd acc; // acc(i, j): copy M_i scored against label set L_j
  std::vector<std::string> user_ids;
  double diagonal_mean = 0.0;
  double diagonal_margin95 = 0.0; // 95% confidence half-width
  double off_diagonal_mean = 0.0;
  double off_diagonal_margin95 = 0.0;
  double max_off_diagonal = 0.0;
};

/// acc(i, j) = % of triggers where tracked_infer(M_i, trigger, sk_i) argmax
/// equals L_j. Matching keys put the diagonal at exactly 100; every other
/// cell sits at chance. Throws TooFewUsersError below 2 users and
/// EmptyTriggerSetError without triggers.
AccuracyMatrix evaluate_matrix(const UserRegistry& reg);

/// Scores a leaked copy (plus whatever key leaked with it) against every
/// registered label set. Attribution succeeds only when one user clears
/// `min_accuracy` percent and leads the runner-up by `min_gap` points;
/// otherwise AmbiguousAttributionError. A copy leaked without its key scores
/// at chance everywhere and stays unattributed by design.
std::string attribute_leak(const UserRegistry& reg, const ModelCopy& leaked,
                           const std::optional<KeyPair>& leaked_key,
                           double min_accuracy = 90.0, double min_gap = 30.0);

/// Persists registry.json, triggers.json + trigger images, and one secret
/// key file per user under `dir`. The classifier itself is not serialized;
/// loaders supply it.
void save_registry(const UserRegistry& reg, const std::filesystem::path& dir);

/// Rebuilds a registry saved by save_registry, reattaching `classifier`.
/// Trigger bytes are checked against their stored digests.
UserRegistry load_registry(const std::filesystem::path& dir,
                           std::shared_ptr<const Classifier> classifier);

} // namespace signet
