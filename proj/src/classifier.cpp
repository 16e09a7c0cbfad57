#include "signet/classifier.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "signet/errors.hpp"

namespace signet {

int argmax(const Logits& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;
  return best;
}

std::vector<Logits> Classifier::predict_batch(std::span<const Image> batch) const {
  std::vector<Logits> out;
  out.reserve(batch.size());
  for (const Image& img : batch) out.push_back(predict(img));
  return out;
}

namespace {

std::array<std::uint8_t, 32> hash_key_from_seed(std::uint64_t seed,
                                                std::string_view domain) {
  std::array<std::uint8_t, 32> key{};
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i)
    le[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  crypto_generichash(key.data(), key.size(), le.data(), le.size(),
                     reinterpret_cast<const unsigned char*>(domain.data()),
                     domain.size());
  return key;
}

double unit_double(std::span<const std::uint8_t, 8> bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | bytes[i];
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// Deterministic helpers over std::mt19937_64 (std distributions are not
// pinned by the standard, these are).
double rng_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double rng_gauss(std::mt19937_64& rng) {
  double u1 = rng_unit(rng);
  while (u1 == 0.0) u1 = rng_unit(rng);
  const double u2 = rng_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace

StubClassifier::StubClassifier(int num_classes, std::uint64_t key_seed)
    : num_classes_(num_classes),
      key_(hash_key_from_seed(key_seed, "signet.stub")) {
  if (num_classes < 2)
    throw SingleClassError("stub classifier needs at least 2 classes");
}

Logits StubClassifier::logits_from_buffer(std::span<const std::uint8_t> buffer,
                                          int height, int width) const {
  std::array<std::uint8_t, 32> digest{};
  crypto_generichash_state state;
  crypto_generichash_init(&state, key_.data(), key_.size(), digest.size());
  std::array<std::uint8_t, 8> dims{};
  for (int i = 0; i < 4; ++i) {
    dims[i] = static_cast<std::uint8_t>(height >> (8 * i));
    dims[4 + i] = static_cast<std::uint8_t>(width >> (8 * i));
  }
  crypto_generichash_update(&state, dims.data(), dims.size());
  crypto_generichash_update(&state, buffer.data(), buffer.size());
  crypto_generichash_final(&state, digest.data(), digest.size());

  Logits logits(num_classes_);
  for (int c = 0; c < num_classes_; ++c) {
    std::array<std::uint8_t, 36> block{};
    std::memcpy(block.data(), digest.data(), digest.size());
    for (int i = 0; i < 4; ++i)
      block[32 + i] = static_cast<std::uint8_t>(c >> (8 * i));
    std::array<std::uint8_t, 8> score{};
    crypto_generichash(score.data(), score.size(), block.data(), block.size(),
                       key_.data(), key_.size());
    logits[c] = unit_double(score);
  }
  return logits;
}

Logits StubClassifier::predict(const Image& img) const {
  return logits_from_buffer(img.data, img.height, img.width);
}

std::string StubClassifier::descriptor() const {
  return "stub(classes=" + std::to_string(num_classes_) + ")";
}

MaskedStubClassifier::MaskedStubClassifier(int num_classes,
                                           std::vector<BoundingBox> ignore,
                                           std::uint64_t key_seed)
    : stub_(num_classes, key_seed), ignore_(std::move(ignore)) {}

Logits MaskedStubClassifier::predict(const Image& img) const {
  std::vector<std::uint8_t> buffer = img.data;
  for (const BoundingBox& box : ignore_) {
    validate_box(img, box);
    for (int y = box.y_min; y < box.y_max; ++y)
      for (int x = box.x_min; x < box.x_max; ++x)
        for (int c = 0; c < Image::kChannels; ++c)
          buffer[static_cast<std::size_t>((y * img.width + x) *
                                          Image::kChannels + c)] &= 0xFEu;
  }
  return stub_.logits_from_buffer(buffer, img.height, img.width);
}

std::string MaskedStubClassifier::descriptor() const {
  return "masked-" + stub_.descriptor() + "+ignore(" +
         std::to_string(ignore_.size()) + ")";
}

ToyLinearClassifier::ToyLinearClassifier(int num_classes, int height,
                                         int width)
    : weights(Eigen::MatrixXd::Zero(
          num_classes, static_cast<long>(height) * width * Image::kChannels)),
      bias(Eigen::VectorXd::Zero(num_classes)), height(height), width(width) {
  if (num_classes < 2)
    throw SingleClassError("toy classifier needs at least 2 classes");
}

Eigen::VectorXd ToyLinearClassifier::features(const Image& img) const {
  if (img.height != height || img.width != width)
    throw InvalidArgumentError(
        "image is " + std::to_string(img.width) + "x" +
        std::to_string(img.height) + " but the classifier expects " +
        std::to_string(width) + "x" + std::to_string(height));
  Eigen::VectorXd x(weights.cols());
  for (long i = 0; i < x.size(); ++i) x[i] = img.data[i] / 255.0;
  return x;
}

Logits ToyLinearClassifier::predict(const Image& img) const {
  return weights * features(img) + bias;
}

std::string ToyLinearClassifier::descriptor() const {
  std::array<std::uint8_t, 8> digest{};
  crypto_generichash_state state;
  crypto_generichash_init(&state, nullptr, 0, digest.size());
  crypto_generichash_update(
      &state, reinterpret_cast<const unsigned char*>(weights.data()),
      sizeof(double) * weights.size());
  crypto_generichash_update(&state,
                            reinterpret_cast<const unsigned char*>(bias.data()),
                            sizeof(double) * bias.size());
  crypto_generichash_final(&state, digest.data(), digest.size());
  char hex[17];
  for (int i = 0; i < 8; ++i) std::snprintf(hex + 2 * i, 3, "%02x", digest[i]);
  return "toy-linear(classes=" + std::to_string(num_classes()) + "," +
         std::to_string(width) + "x" + std::to_string(height) + ",params=" +
         hex + ")";
}

namespace {

constexpr char kToyMagic[4] = {'S', 'G', 'T', 'W'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
  out.write(b.data(), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = v << 8 | b[i];
  return v;
}

void check_labels(const Dataset& data) {
  if (data.samples.empty())
    throw EmptyDatasetError("dataset holds no samples");
  for (const LabeledImage& s : data.samples)
    if (s.label < 0 || s.label >= data.num_classes)
      throw LabelOutOfRangeError("label " + std::to_string(s.label) +
                                 " outside [0, " +
                                 std::to_string(data.num_classes) + ")");
}

} // namespace

void ToyLinearClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kToyMagic, 4);
  write_u32(out, 1); // format version
  write_u32(out, static_cast<std::uint32_t>(num_classes()));
  write_u32(out, static_cast<std::uint32_t>(height));
  write_u32(out, static_cast<std::uint32_t>(width));
  // Row-major weights then bias, little-endian float64.
  for (long r = 0; r < weights.rows(); ++r)
    for (long c = 0; c < weights.cols(); ++c) {
      const double v = weights(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  out.write(reinterpret_cast<const char*>(bias.data()),
            static_cast<std::streamsize>(sizeof(double) * bias.size()));
  if (!out) throw IoError("short write: " + path.string());
}

ToyLinearClassifier ToyLinearClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kToyMagic, 4) != 0)
    throw UnsupportedFormatError("not a toy-classifier weights file: " +
                                 path.string());
  const std::uint32_t version = read_u32(in);
  if (version != 1)
    throw UnsupportedFormatError("unsupported weights version " +
                                 std::to_string(version));
  const int num_classes = static_cast<int>(read_u32(in));
  const int height = static_cast<int>(read_u32(in));
  const int width = static_cast<int>(read_u32(in));
  ToyLinearClassifier model(num_classes, height, width);
  for (long r = 0; r < model.weights.rows(); ++r)
    for (long c = 0; c < model.weights.cols(); ++c) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      model.weights(r, c) = v;
    }
  in.read(reinterpret_cast<char*>(model.bias.data()),
          static_cast<std::streamsize>(sizeof(double) * model.bias.size()));
  if (!in) throw IoError("truncated weights file: " + path.string());
  return model;
}

double toy_loss_and_grad(const ToyLinearClassifier& model, const Dataset& data,
                         Eigen::MatrixXd& grad_weights,
                         Eigen::VectorXd& grad_bias) {
  check_labels(data);
  const long n = static_cast<long>(data.samples.size());
  const long dim = model.weights.cols();
  const int classes = model.num_classes();

  Eigen::MatrixXd x(dim, n);
  for (long j = 0; j < n; ++j)
    x.col(j) = model.features(data.samples[j].image);

  Eigen::MatrixXd z = model.weights * x;
  z.colwise() += model.bias;

  // Column-wise softmax with max subtraction; accumulates the mean
  // cross-entropy and leaves (p - y) in z.
  double loss = 0.0;
  for (long j = 0; j < n; ++j) {
    const double zmax = z.col(j).maxCoeff();
    const Eigen::VectorXd e = (z.col(j).array() - zmax).exp();
    const double sum = e.sum();
    loss -= std::log(e[data.samples[j].label] / sum);
    z.col(j) = e / sum;
    z(data.samples[j].label, j) -= 1.0;
  }
  loss /= static_cast<double>(n);

  grad_weights.resize(classes, dim);
  grad_weights.noalias() = z * x.transpose() / static_cast<double>(n);
  grad_bias = z.rowwise().sum() / static_cast<double>(n);
  return loss;
}

ToyLinearClassifier train_toy(const Dataset& data, int epochs, double lr,
                              TrainReport* report) {
  check_labels(data);
  const Image& first = data.samples.front().image;
  ToyLinearClassifier model(data.num_classes, first.height, first.width);

  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  double loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    loss = toy_loss_and_grad(model, data, grad_w, grad_b);
    model.weights.noalias() -= lr * grad_w;
    model.bias.noalias() -= lr * grad_b;
  }

  if (report) {
    report->final_loss = loss;
    report->train_accuracy = dataset_accuracy(model, data);
    report->epochs = epochs;
  }
  return model;
}

double dataset_accuracy(const Classifier& model, const Dataset& data) {
  if (data.samples.empty())
    throw EmptyDatasetError("dataset holds no samples");
  long correct = 0;
  for (const LabeledImage& s : data.samples)
    if (argmax(model.predict(s.image)) == s.label) ++correct;
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(data.samples.size());
}

Dataset gen_blob_dataset(int num_classes, int per_class, int height, int width,
                         std::uint64_t seed) {
  if (per_class < 1)
    throw InvalidArgumentError("per_class must be >= 1");
  if (num_classes < 1)
    throw ZeroClassesError("num_classes must be >= 1");

  std::mt19937_64 rng(seed);
  const std::size_t len =
      static_cast<std::size_t>(height) * width * Image::kChannels;

  Dataset data;
  data.num_classes = num_classes;
  data.samples.reserve(static_cast<std::size_t>(num_classes) * per_class);

  constexpr double kNoiseSigma = 18.0;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<double> mean(len);
    for (double& m : mean) m = 40.0 + rng_unit(rng) * 175.0;
    for (int s = 0; s < per_class; ++s) {
      Image img(height, width);
      for (std::size_t i = 0; i < len; ++i) {
        const double v = mean[i] + kNoiseSigma * rng_gauss(rng);
        const int q = std::clamp(static_cast<int>(std::lround(v)), 0, 255);
        // Class signal in the 7 high bits only; the LSB is a fair coin.
        img.data[i] =
            static_cast<std::uint8_t>((q & 0xFE) | (rng() & 1u));
      }
      data.samples.push_back({std::move(img), c});
    }
  }
  return data;
}

std::vector<Image> gen_noise_images(int count, int height, int width,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Image> images;
  images.reserve(count);
  for (int i = 0; i < count; ++i) {
    Image img(height, width);
    for (auto& byte : img.data) byte = static_cast<std::uint8_t>(rng() & 0xFF);
    images.push_back(std::move(img));
  }
  return images;
}

} // namespace signet
