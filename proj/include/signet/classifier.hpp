#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "signet/image.hpp"

namespace signet {

/// One real score per class.
using Logits = Eigen::VectorXd;

/// Index of the largest logit; ties break to the lowest index.
int argmax(const Logits& logits);

/// Deterministic classifier contract: identical input, identical logits.
class Classifier {
public:
  virtual ~Classifier() = default;

  virtual int num_classes() const = 0;
  virtual Logits predict(const Image& img) const = 0;
  virtual std::string descriptor() const = 0;

  std::vector<Logits> predict_batch(std::span<const Image> batch) const;
};

/// Keyed-hash classifier stand-in: logits are derived from a BLAKE2b hash of
/// the full pixel buffer, so the argmax is approximately uniform over random
/// images and flipping any single bit anywhere reshuffles the scores.
class StubClassifier : public Classifier {
public:
  StubClassifier(int num_classes, std::uint64_t key_seed = 0);

  int num_classes() const override { return num_classes_; }
  Logits predict(const Image& img) const override;
  std::string descriptor() const override;

private:
  friend class MaskedStubClassifier;
  Logits logits_from_buffer(std::span<const std::uint8_t> buffer,
                            int height, int width) const;

  int num_classes_;
  std::array<std::uint8_t, 32> key_;
};

/// Same as StubClassifier except channels inside the `ignore` boxes
/// contribute only their 7 high bits to the hash. LSB payloads embedded
/// there leave the prediction exactly unchanged, mirroring how real CNNs
/// ignore LSB perturbations.
class MaskedStubClassifier : public Classifier {
public:
  MaskedStubClassifier(int num_classes, std::vector<BoundingBox> ignore,
                       std::uint64_t key_seed = 0);

  int num_classes() const override { return stub_.num_classes(); }
  Logits predict(const Image& img) const override;
  std::string descriptor() const override;

private:
  StubClassifier stub_;
  std::vector<BoundingBox> ignore_;
};

struct LabeledImage {
  Image image;
  int label = 0;
};

struct Dataset {
  std::vector<LabeledImage> samples;
  int num_classes = 0;
};

/// Single affine layer over normalized pixels (channel / 255, no mean
/// subtraction): logits = W x + b.
class ToyLinearClassifier : public Classifier {
public:
  ToyLinearClassifier(int num_classes, int height, int width);

  int num_classes() const override { return static_cast<int>(weights.rows()); }
  Logits predict(const Image& img) const override;
  std::string descriptor() const override;

  Eigen::VectorXd features(const Image& img) const;

  void save(const std::filesystem::path& path) const;
  static ToyLinearClassifier load(const std::filesystem::path& path);

  Eigen::MatrixXd weights; // num_classes x feature_dim
  Eigen::VectorXd bias;    // num_classes
  int height;
  int width;
};

struct TrainReport {
  double final_loss = 0.0;
  double train_accuracy = 0.0; // percent
  int epochs = 0;
};

/// Mean softmax cross-entropy over the dataset and its analytic gradient.
/// Exposed separately so the gradient can be checked against finite
/// differences.
double toy_loss_and_grad(const ToyLinearClassifier& model, const Dataset& data,
                         Eigen::MatrixXd& grad_weights,
                         Eigen::VectorXd& grad_bias);

/// Full-batch gradient descent on softmax cross-entropy.
ToyLinearClassifier train_toy(const Dataset& data, int epochs, double lr,
                              TrainReport* report = nullptr);

double dataset_accuracy(const Classifier& model, const Dataset& data);

/// Seeded synthetic classification data: each class has a random mean image
/// and samples scatter around it. The class signal lives entirely in the 7
/// high bits; every LSB is an independent coin flip, so embedding payloads
/// cannot shift class statistics.
Dataset gen_blob_dataset(int num_classes, int per_class, int height, int width,
                         std::uint64_t seed);

/// Seeded uniform-noise images; stand-ins for out-of-distribution trigger
/// samples.
std::vector<Image> gen_noise_images(int count, int height, int width,
                                    std::uint64_t seed);

} // namespace signet
