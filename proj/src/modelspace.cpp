#include "srplan/modelspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "srplan/error.hpp"
#include "srplan/io.hpp"

namespace srplan::modelspace {

namespace {

using json = nlohmann::json;

Macs checked_mul(Macs a, Macs b) {
  Macs out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorKind::validation, "MAC count overflows 64 bits");
  }
  return out;
}

Macs checked_add(Macs a, Macs b) {
  Macs out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorKind::validation, "MAC count overflows 64 bits");
  }
  return out;
}

void require_divisible(std::int64_t value, std::int64_t by, const char* what) {
  if (by < 1 || value % by != 0) {
    throw Error(ErrorKind::validation, std::string(what) + ": " + std::to_string(value) +
                                           " is not divisible by " + std::to_string(by));
  }
}

// One convolution line of a building block, at the layer's output resolution.
Macs conv(std::int64_t in, std::int64_t out, std::int64_t kh, std::int64_t kw,
          std::int64_t groups, const LayerShape& at) {
  require_divisible(in, groups, "input channels vs groups");
  require_divisible(out, groups, "output channels vs groups");
  LayerShape line{in, out, kh, kw, at.Fh, at.Fw, groups, false};
  return standard_conv_macs(line);
}

Macs sum(std::initializer_list<Macs> parts) {
  Macs total = 0;
  for (Macs m : parts) {
    total = checked_add(total, m);
  }
  return total;
}

constexpr std::array<std::pair<TransformKind, std::string_view>, 7> kTransformNames{{
    {TransformKind::rb, "rb"},
    {TransformKind::grp, "grp"},
    {TransformKind::dpth, "dpth"},
    {TransformKind::sep, "sep"},
    {TransformKind::invr, "invr"},
    {TransformKind::chlshf, "chlshf"},
    {TransformKind::chlsplt, "chlsplt"},
}};

bool takes_param(TransformKind kind) {
  return kind == TransformKind::rb || kind == TransformKind::grp || kind == TransformKind::invr;
}

double bottleneck_reduction(double r, const LayerShape& s) {
  const double S = static_cast<double>(s.S);
  const double D = static_cast<double>(s.D);
  const double K = static_cast<double>(s.Kh) * static_cast<double>(s.Kw);
  return S / (D * K * r) + S / (r * r * D) + 1.0 / (K * r);
}

}  // namespace

void LayerShape::validate() const {
  for (std::int64_t v : {S, D, Kh, Kw, Fh, Fw, g}) {
    if (v < 1) {
      throw Error(ErrorKind::validation, "layer shape fields must all be >= 1");
    }
  }
  require_divisible(S, g, "layer input channels vs groups");
  require_divisible(D, g, "layer output channels vs groups");
}

std::string_view to_string(TransformKind kind) {
  for (const auto& [k, name] : kTransformNames) {
    if (k == kind) {
      return name;
    }
  }
  return "?";
}

TransformKind parse_transform_kind(std::string_view name) {
  for (const auto& [k, n] : kTransformNames) {
    if (n == name) {
      return k;
    }
  }
  throw Error(ErrorKind::validation, "unknown transformation '" + std::string(name) + "'");
}

Transformation::Transformation(TransformKind kind, std::optional<std::int64_t> param)
    : kind_(kind), param_(param) {
  if (takes_param(kind)) {
    if (!param || *param < 1) {
      throw Error(ErrorKind::validation,
                  std::string(to_string(kind)) + " needs a parameter >= 1");
    }
  } else if (param) {
    throw Error(ErrorKind::validation, std::string(to_string(kind)) + " takes no parameter");
  }
}

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::standard: return "standard";
    case BlockKind::group: return "group";
    case BlockKind::separable: return "separable";
    case BlockKind::bottleneck: return "bottleneck";
    case BlockKind::inverted_bottleneck: return "inverted_bottleneck";
    case BlockKind::resnext: return "resnext";
    case BlockKind::depthwise_separable: return "depthwise_separable";
    case BlockKind::effnet: return "effnet";
    case BlockKind::mobilenet_v2: return "mobilenet_v2";
    case BlockKind::clc: return "clc";
    case BlockKind::shufflenet_v1: return "shufflenet_v1";
    case BlockKind::shufflenet_v2: return "shufflenet_v2";
  }
  return "?";
}

Macs standard_conv_macs(const LayerShape& shape) {
  shape.validate();
  Macs m = 1;
  for (std::int64_t v : {shape.S, shape.D, shape.Kh, shape.Kw, shape.Fh, shape.Fw}) {
    m = checked_mul(m, static_cast<Macs>(v));
  }
  // Exact: g divides S.
  return m / static_cast<Macs>(shape.g);
}

double reduction_factor(const Transformation& t, const LayerShape& shape) {
  shape.validate();
  const double D = static_cast<double>(shape.D);
  const double Kh = static_cast<double>(shape.Kh);
  const double Kw = static_cast<double>(shape.Kw);
  switch (t.kind()) {
    case TransformKind::rb:
      return bottleneck_reduction(static_cast<double>(*t.param()), shape);
    case TransformKind::grp:
      return 1.0 / static_cast<double>(*t.param());
    case TransformKind::dpth:
      return 1.0 / D + 1.0 / ((Kh * Kw) * (Kh * Kw));
    case TransformKind::sep:
      return 1.0 / Kh + 1.0 / Kw;
    case TransformKind::invr:
      return bottleneck_reduction(1.0 / static_cast<double>(*t.param()), shape);
    case TransformKind::chlshf:
    case TransformKind::chlsplt:
      break;
  }
  throw Error(ErrorKind::no_formula, std::string(to_string(t.kind())) +
                                         " has no closed-form reduction; cost its block with "
                                         "block_macs");
}

BlockCost block_macs(BlockKind block, const LayerShape& shape, const BlockParams& params) {
  shape.validate();
  const auto& s = shape;
  const std::int64_t K_h = s.Kh;
  const std::int64_t K_w = s.Kw;
  Macs macs = 0;
  switch (block) {
    case BlockKind::standard:
      macs = standard_conv_macs(s);
      break;
    case BlockKind::group:
      macs = conv(s.S, s.D, K_h, K_w, params.g, s);
      break;
    case BlockKind::separable:
      macs = sum({conv(s.S, s.D, 1, K_h, 1, s), conv(s.D, s.D, K_w, 1, 1, s)});
      break;
    case BlockKind::bottleneck: {
      require_divisible(s.S, params.r, "bottleneck channels vs r");
      const std::int64_t c = s.S / params.r;
      macs = sum({conv(s.S, c, 1, 1, 1, s), conv(c, c, K_h, K_w, 1, s), conv(c, s.D, 1, 1, 1, s)});
      break;
    }
    case BlockKind::inverted_bottleneck: {
      const std::int64_t c = s.S * params.e;
      macs = sum({conv(s.S, c, 1, 1, 1, s), conv(c, c, K_h, K_w, 1, s), conv(c, s.D, 1, 1, 1, s)});
      break;
    }
    case BlockKind::resnext: {
      require_divisible(s.S, params.r, "resnext channels vs r");
      const std::int64_t c = s.S / params.r;
      macs = sum({conv(s.S, c, 1, 1, 1, s), conv(c, c, K_h, K_w, params.g, s),
                  conv(c, s.D, 1, 1, 1, s)});
      break;
    }
    case BlockKind::depthwise_separable:
      macs = sum({conv(s.S, s.S, K_h, K_w, s.S, s), conv(s.S, s.D, 1, 1, 1, s)});
      break;
    case BlockKind::effnet: {
      require_divisible(s.S, params.r, "effnet channels vs r");
      const std::int64_t c = s.S / params.r;
      macs = sum({conv(s.S, c, 1, 1, 1, s), conv(c, c, 1, K_w, c, s), conv(c, c, K_h, 1, c, s),
                  conv(c, s.D, 1, 1, 1, s)});
      break;
    }
    case BlockKind::mobilenet_v2: {
      const std::int64_t c = s.S * params.e;
      macs = sum({conv(s.S, c, 1, 1, 1, s), conv(c, c, K_h, K_w, c, s), conv(c, s.D, 1, 1, 1, s)});
      break;
    }
    case BlockKind::clc:
      macs = sum({conv(s.S, s.S, K_h, K_w, params.g, s), conv(s.S, s.D, 1, 1, 1, s)});
      break;
    case BlockKind::shufflenet_v1: {
      require_divisible(s.S, params.r, "shufflenet channels vs r");
      const std::int64_t c = s.S / params.r;
      macs = sum({conv(s.S, c, 1, 1, params.g, s), conv(c, c, K_h, K_w, c, s),
                  conv(c, s.D, 1, 1, params.g, s)});
      break;
    }
    case BlockKind::shufflenet_v2: {
      require_divisible(s.S, 2, "channel split");
      if (s.D != s.S) {
        throw Error(ErrorKind::validation,
                    "channel-split block concatenates back to S channels; needs D == S");
      }
      const std::int64_t c = s.S / 2;
      macs = sum({conv(c, c, 1, 1, 1, s), conv(c, c, K_h, K_w, c, s), conv(c, c, 1, 1, 1, s)});
      break;
    }
  }
  const Macs reference = standard_conv_macs(s);
  return {macs, static_cast<double>(macs) / static_cast<double>(reference)};
}

std::pair<BlockKind, BlockParams> block_for(const std::vector<Transformation>& applied) {
  std::set<TransformKind> kinds;
  BlockParams params;
  for (const auto& t : applied) {
    if (!kinds.insert(t.kind()).second) {
      throw Error(ErrorKind::validation,
                  "transformation " + std::string(to_string(t.kind())) + " applied twice");
    }
    switch (t.kind()) {
      case TransformKind::rb: params.r = *t.param(); break;
      case TransformKind::grp: params.g = *t.param(); break;
      case TransformKind::invr: params.e = *t.param(); break;
      default: break;
    }
  }
  using T = TransformKind;
  static const std::vector<std::pair<std::set<TransformKind>, BlockKind>> kBlocks{
      {{}, BlockKind::standard},
      {{T::rb}, BlockKind::bottleneck},
      {{T::grp}, BlockKind::group},
      {{T::dpth}, BlockKind::depthwise_separable},
      {{T::sep}, BlockKind::separable},
      {{T::invr}, BlockKind::inverted_bottleneck},
      {{T::rb, T::grp}, BlockKind::resnext},
      {{T::rb, T::dpth, T::sep}, BlockKind::effnet},
      {{T::dpth, T::invr}, BlockKind::mobilenet_v2},
      {{T::grp, T::chlshf}, BlockKind::clc},
      {{T::rb, T::grp, T::dpth, T::chlshf}, BlockKind::shufflenet_v1},
      {{T::chlsplt, T::dpth, T::chlshf}, BlockKind::shufflenet_v2},
  };
  for (const auto& [set, block] : kBlocks) {
    if (set == kinds) {
      return {block, params};
    }
  }
  std::string names;
  for (auto k : kinds) {
    names += (names.empty() ? "" : ",") + std::string(to_string(k));
  }
  throw Error(ErrorKind::validation, "no building block for transformation set {" + names + "}");
}

Macs model_macs(const Model& model) {
  if (model.layers.empty()) {
    throw Error(ErrorKind::validation, "model '" + model.id + "' has no layer shapes");
  }
  const auto [block, params] = block_for(model.applied);
  Macs total = 0;
  for (const auto& layer : model.layers) {
    if (layer.fixed || block == BlockKind::standard) {
      total = checked_add(total, standard_conv_macs(layer));
      continue;
    }
    if (layer.g != 1) {
      throw Error(ErrorKind::validation,
                  "model '" + model.id + "': transformed core layers must be dense (g = 1)");
    }
    total = checked_add(total, block_macs(block, layer, params).macs);
  }
  return total;
}

std::uint64_t design_count(std::uint64_t model_count, std::uint64_t n_tv) {
  if (model_count < 1 || n_tv < 1) {
    throw Error(ErrorKind::invalid_argument, "design_count inputs must be >= 1");
  }
  return checked_mul(checked_mul(model_count, model_count), n_tv);
}

Catalog::Catalog(std::vector<Model> models) : models_(std::move(models)) {
  std::set<std::string> ids;
  for (const auto& m : models_) {
    if (m.id.empty()) {
      throw Error(ErrorKind::validation, "model id must not be empty");
    }
    if (!ids.insert(m.id).second) {
      throw Error(ErrorKind::validation, "duplicate model id '" + m.id + "'");
    }
  }
  for (const auto& m : models_) {
    if (!(m.params_k > 0.0) || !std::isfinite(m.params_k)) {
      throw Error(ErrorKind::validation, "model '" + m.id + "': params_k must be > 0");
    }
    if (!ids.contains(m.ref_id)) {
      throw Error(ErrorKind::validation,
                  "model '" + m.id + "': reference '" + m.ref_id + "' not in catalog");
    }
    if (m.is_reference() && !m.applied.empty()) {
      throw Error(ErrorKind::validation,
                  "reference model '" + m.id + "' must have no transformations");
    }
    block_for(m.applied);
    for (const auto& layer : m.layers) {
      layer.validate();
    }
  }
}

const Model* Catalog::find(std::string_view id) const {
  const auto it = std::find_if(models_.begin(), models_.end(),
                               [&](const Model& m) { return m.id == id; });
  return it == models_.end() ? nullptr : &*it;
}

const Model& Catalog::at(std::string_view id) const {
  if (const Model* m = find(id)) {
    return *m;
  }
  throw Error(ErrorKind::validation, "model '" + std::string(id) + "' not in catalog");
}

json to_json(const Catalog& catalog) {
  json models = json::array();
  for (const auto& m : catalog.models()) {
    json applied = json::array();
    for (const auto& t : m.applied) {
      json entry{{"kind", to_string(t.kind())}};
      entry["param"] = t.param() ? json(*t.param()) : json(nullptr);
      applied.push_back(entry);
    }
    json layers = json::array();
    for (const auto& l : m.layers) {
      layers.push_back({{"S", l.S}, {"D", l.D}, {"Kh", l.Kh}, {"Kw", l.Kw}, {"Fh", l.Fh},
                        {"Fw", l.Fw}, {"g", l.g}, {"fixed", l.fixed}});
    }
    json entry{{"id", m.id},           {"ref_id", m.ref_id}, {"applied", applied},
               {"params_k", m.params_k}, {"layers", layers}};
    if (!m.theta_ref.empty()) {
      entry["theta_ref"] = m.theta_ref;
    }
    models.push_back(entry);
  }
  return {{"models", models}};
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw Error(ErrorKind::validation, where + ": missing '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::validation, where + ": bad type for '" + key + "'");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

}  // namespace

Catalog catalog_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array()) {
    throw Error(ErrorKind::validation, "catalog: expected {\"models\": [...]}");
  }
  std::vector<Model> models;
  for (const auto& jm : doc["models"]) {
    if (!jm.is_object()) {
      throw Error(ErrorKind::validation, "catalog: model entries must be objects");
    }
    Model m;
    m.id = field<std::string>(jm, "id", "catalog model");
    const std::string where = "catalog model '" + m.id + "'";
    m.ref_id = field<std::string>(jm, "ref_id", where);
    m.params_k = field<double>(jm, "params_k", where);
    m.theta_ref = field_or<std::string>(jm, "theta_ref", "", where);
    for (const auto& jt : field<json>(jm, "applied", where)) {
      const auto kind = parse_transform_kind(field<std::string>(jt, "kind", where));
      std::optional<std::int64_t> param;
      if (jt.contains("param") && !jt["param"].is_null()) {
        param = field<std::int64_t>(jt, "param", where);
      }
      m.applied.emplace_back(kind, param);
    }
    if (jm.contains("layers")) {
      for (const auto& jl : jm["layers"]) {
        LayerShape l;
        l.S = field<std::int64_t>(jl, "S", where);
        l.D = field<std::int64_t>(jl, "D", where);
        l.Kh = field<std::int64_t>(jl, "Kh", where);
        l.Kw = field<std::int64_t>(jl, "Kw", where);
        l.Fh = field<std::int64_t>(jl, "Fh", where);
        l.Fw = field<std::int64_t>(jl, "Fw", where);
        l.g = field_or<std::int64_t>(jl, "g", 1, where);
        l.fixed = field_or<bool>(jl, "fixed", false, where);
        m.layers.push_back(l);
      }
    }
    models.push_back(std::move(m));
  }
  return Catalog(std::move(models));
}

Catalog load_catalog(const std::filesystem::path& path) {
  return catalog_from_json(io::load_json(path));
}

}  // namespace srplan::modelspace
