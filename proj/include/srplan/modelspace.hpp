#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace srplan::modelspace {

using Macs = std::uint64_t;

/// One convolution: S input channels, D output channels, Kh x Kw kernel,
/// Fh x Fw output feature map, g groups. `fixed` layers (head, upsampler)
/// are never transformed.
struct LayerShape {
  std::int64_t S = 1;
  std::int64_t D = 1;
  std::int64_t Kh = 1;
  std::int64_t Kw = 1;
  std::int64_t Fh = 1;
  std::int64_t Fw = 1;
  std::int64_t g = 1;
  bool fixed = false;

  /// Throws Error{validation} unless every field is >= 1 and g divides S and D.
  void validate() const;
  bool operator==(const LayerShape&) const = default;
};

enum class TransformKind { rb, grp, dpth, sep, invr, chlshf, chlsplt };

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/// Element of the transformation set. rb carries r, grp carries g, invr
/// carries e; the rest take no parameter.
class Transformation {
 public:
  Transformation(TransformKind kind, std::optional<std::int64_t> param = std::nullopt);

  static Transformation rb(std::int64_t r) { return {TransformKind::rb, r}; }
  static Transformation grp(std::int64_t g) { return {TransformKind::grp, g}; }
  static Transformation dpth() { return {TransformKind::dpth}; }
  static Transformation sep() { return {TransformKind::sep}; }
  static Transformation invr(std::int64_t e) { return {TransformKind::invr, e}; }
  static Transformation chlshf() { return {TransformKind::chlshf}; }
  static Transformation chlsplt() { return {TransformKind::chlsplt}; }

  TransformKind kind() const noexcept { return kind_; }
  std::optional<std::int64_t> param() const noexcept { return param_; }

  bool operator==(const Transformation&) const = default;

 private:
  TransformKind kind_;
  std::optional<std::int64_t> param_;
};

/// Replacement building blocks for a core KhxKw convolution.
enum class BlockKind {
  standard,             // no transformation
  group,                // grp(g): grouped convolution
  separable,            // sep: 1xKh then Kwx1
  bottleneck,           // rb(r), m_rn
  inverted_bottleneck,  // invr(e) without depthwise
  resnext,              // rb(r) + grp(g), m_rxn
  depthwise_separable,  // dpth, m_m1
  effnet,               // rb(r) + dpth + sep, m_eff
  mobilenet_v2,         // dpth + invr(e), m_m2
  clc,                  // grp(g) + chlshf, m_clc
  shufflenet_v1,        // rb(r) + grp(g) + dpth + chlshf, m_s1
  shufflenet_v2,        // chlsplt + dpth + chlshf, m_s2
};

std::string_view to_string(BlockKind kind);

struct BlockParams {
  std::int64_t r = 2;
  std::int64_t g = 4;
  std::int64_t e = 2;
};

struct BlockCost {
  Macs macs = 0;
  double reduction = 0.0;  // macs / standard conv macs of the same shape
};

/// Eq. (S*D*Kh*Kw*Fh*Fw) / g with overflow checking.
Macs standard_conv_macs(const LayerShape& shape);

/// Closed-form cost ratio against a standard convolution. chlshf and
/// chlsplt throw Error{no_formula}: only their composed blocks are costed.
double reduction_factor(const Transformation& t, const LayerShape& shape);

/// Sums the convolution lines of a building block; shuffles, splits,
/// activations and residual adds are free.
BlockCost block_macs(BlockKind block, const LayerShape& shape, const BlockParams& params = {});

/// Maps an applied-transformation set to its building block and parameters.
/// Throws Error{validation} for combinations without a block.
std::pair<BlockKind, BlockParams> block_for(const std::vector<Transformation>& applied);

struct Model {
  std::string id;
  std::string ref_id;
  std::vector<Transformation> applied;
  double params_k = 0.0;
  std::string theta_ref;  // opaque weights identifier, never dereferenced
  std::vector<LayerShape> layers;

  bool is_reference() const { return id == ref_id; }
};

/// Transformed core layers use the model's block; fixed layers and the
/// reference model use standard convolutions.
Macs model_macs(const Model& model);

/// |M|^2 * N_TV
std::uint64_t design_count(std::uint64_t model_count, std::uint64_t n_tv);

class Catalog {
 public:
  Catalog() = default;
  /// Validates ids, parameter counts and reference links.
  explicit Catalog(std::vector<Model> models);

  const std::vector<Model>& models() const noexcept { return models_; }
  const Model* find(std::string_view id) const;
  const Model& at(std::string_view id) const;

 private:
  std::vector<Model> models_;
};

nlohmann::json to_json(const Catalog& catalog);
Catalog catalog_from_json(const nlohmann::json& doc);
Catalog load_catalog(const std::filesystem::path& path);

}  // namespace srplan::modelspace
