#include "gazenet/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::attribution {

using text_io::format_double;

namespace {

const std::vector<double>& tensor(const nn::ModelParams& p, const std::string& name) {
  const nn::Tensor* t = p.find(name);
  if (t == nullptr) fail(ErrorCategory::Shape, "attribution: parameter tensor " + name + " missing");
  return t->values;
}

nn::Batch pool_forward(const nn::Batch& x, nn::PoolKind kind) {
  nn::Batch y(x.n, x.c, x.t / 2);
  for (std::size_t i = 0; i < x.n; ++i) {
    for (std::size_t ch = 0; ch < x.c; ++ch) {
      const double* in = x.row(i, ch);
      double* out = y.row(i, ch);
      for (std::size_t t = 0; t < y.t; ++t) {
        const double a = in[2 * t];
        const double b = in[2 * t + 1];
        out[t] = kind == nn::PoolKind::Average ? 0.5 * (a + b) : std::max(a, b);
      }
    }
  }
  return y;
}

// Rescale multiplier of relu between input d and reference input d0.
double relu_multiplier(double d, double d0) {
  const double delta = d - d0;
  if (std::abs(delta) < kRescaleEpsilon) return d > 0.0 ? 1.0 : 0.0;
  return (std::max(d, 0.0) - std::max(d0, 0.0)) / delta;
}

}  // namespace

InferenceGraph InferenceGraph::fold(const nn::ModelSpec& spec, const nn::ModelParams& params) {
  spec.validate();
  InferenceGraph g(static_cast<std::size_t>(spec.input_channels), static_cast<std::size_t>(spec.input_length));
  std::size_t channels = g.channels_;
  for (std::size_t i = 0; i < spec.conv_layers.size(); ++i) {
    const auto& c = spec.conv_layers[i];
    const auto idx = std::to_string(i);
    const auto filters = static_cast<std::size_t>(c.filters);
    nn::Conv1d conv(channels, filters, static_cast<std::size_t>(c.kernel), static_cast<std::size_t>(c.stride));
    conv.weight() = tensor(params, "conv" + idx + ".weight");
    conv.bias() = tensor(params, "conv" + idx + ".bias");
    if (conv.weight().size() != filters * channels * conv.kernel() || conv.bias().size() != filters) {
      fail(ErrorCategory::Shape, "attribution: conv" + idx + " tensors do not match the model spec");
    }
    g.add(ConvOp{std::move(conv)});
    g.add(ReluOp{});

    const auto& gamma = tensor(params, "bn" + idx + ".gamma");
    const auto& beta = tensor(params, "bn" + idx + ".beta");
    const auto& mean = tensor(params, "bn" + idx + ".running_mean");
    const auto& var = tensor(params, "bn" + idx + ".running_var");
    if (gamma.size() != filters || beta.size() != filters || mean.size() != filters || var.size() != filters) {
      fail(ErrorCategory::Shape, "attribution: bn" + idx + " tensors do not match the model spec");
    }
    nn::BatchNorm1d reference_bn(filters);
    AffineOp affine;
    affine.scale.resize(filters);
    affine.shift.resize(filters);
    for (std::size_t f = 0; f < filters; ++f) {
      const double inv = 1.0 / std::sqrt(var[f] + reference_bn.eps());
      affine.scale[f] = gamma[f] * inv;
      affine.shift[f] = beta[f] - mean[f] * gamma[f] * inv;
    }
    g.add(std::move(affine));
    g.add(PoolOp{spec.pool});
    channels = filters;
  }
  std::size_t width = spec.flattened_size();
  auto dense_op = [&](const std::string& name, std::size_t units) {
    nn::Dense d(width, units);
    d.weight() = tensor(params, name + ".weight");
    d.bias() = tensor(params, name + ".bias");
    if (d.weight().size() != units * width || d.bias().size() != units) {
      fail(ErrorCategory::Shape, "attribution: " + name + " tensors do not match the model spec");
    }
    width = units;
    return DenseOp{std::move(d)};
  };
  for (int d = 0; d + 1 < spec.dense_layers; ++d) {
    g.add(dense_op("dense" + std::to_string(d), static_cast<std::size_t>(spec.hidden_units)));
    g.add(ReluOp{});
  }
  g.add(dense_op("head", 1));
  return g;
}

std::vector<nn::Batch> InferenceGraph::run(std::span<const double> x) {
  if (x.size() != channels_ * length_) fail(ErrorCategory::Shape, "attribution: input has wrong size");
  std::vector<nn::Batch> acts;
  acts.reserve(ops_.size() + 1);
  nn::Batch h(1, channels_, length_);
  std::copy(x.begin(), x.end(), h.v.begin());
  acts.push_back(h);
  for (auto& op : ops_) {
    const nn::Batch& in = acts.back();
    nn::Batch out;
    if (auto* conv = std::get_if<ConvOp>(&op)) {
      out = conv->layer.forward(in, nn::Mode::Infer, nullptr);
    } else if (auto* aff = std::get_if<AffineOp>(&op)) {
      if (aff->scale.size() != in.c) fail(ErrorCategory::Shape, "attribution: affine channel mismatch");
      out = in;
      for (std::size_t ch = 0; ch < in.c; ++ch) {
        double* r = out.row(0, ch);
        for (std::size_t t = 0; t < in.t; ++t) r[t] = aff->scale[ch] * r[t] + aff->shift[ch];
      }
    } else if (std::holds_alternative<ReluOp>(op)) {
      out = in;
      for (double& v : out.v) v = std::max(v, 0.0);
    } else if (auto* pool = std::get_if<PoolOp>(&op)) {
      out = pool_forward(in, pool->kind);
    } else {
      out = std::get<DenseOp>(op).layer.forward(in, nn::Mode::Infer, nullptr);
    }
    acts.push_back(std::move(out));
  }
  if (acts.back().v.size() != 1) fail(ErrorCategory::Shape, "attribution: graph output is not a scalar");
  return acts;
}

double InferenceGraph::forward(std::span<const double> x) { return run(x).back().v[0]; }

InferenceGraph::Result InferenceGraph::deeplift(std::span<const double> x, std::span<const double> reference) {
  const auto ref = run(reference);
  // Run the input last so the linear layers hold its shape in their caches.
  const auto act = run(x);

  nn::Batch m(1, 1, 1);
  m.v[0] = 1.0;
  for (std::size_t i = ops_.size(); i-- > 0;) {
    auto& op = ops_[i];
    const nn::Batch& in = act[i];
    const nn::Batch& in_ref = ref[i];
    if (auto* conv = std::get_if<ConvOp>(&op)) {
      m = conv->layer.backward(m);
    } else if (auto* dense = std::get_if<DenseOp>(&op)) {
      m = dense->layer.backward(m);
    } else if (auto* aff = std::get_if<AffineOp>(&op)) {
      for (std::size_t ch = 0; ch < m.c; ++ch) {
        double* r = m.row(0, ch);
        for (std::size_t t = 0; t < m.t; ++t) r[t] *= aff->scale[ch];
      }
    } else if (std::holds_alternative<ReluOp>(op)) {
      for (std::size_t k = 0; k < m.v.size(); ++k) m.v[k] *= relu_multiplier(in.v[k], in_ref.v[k]);
    } else {
      const auto kind = std::get<PoolOp>(op).kind;
      nn::Batch mi(1, in.c, in.t);
      for (std::size_t ch = 0; ch < in.c; ++ch) {
        const double* a = in.row(0, ch);
        const double* a0 = in_ref.row(0, ch);
        const double* mo = m.row(0, ch);
        double* r = mi.row(0, ch);
        for (std::size_t t = 0; t < m.t; ++t) {
          if (kind == nn::PoolKind::Average) {
            r[2 * t] = 0.5 * mo[t];
            r[2 * t + 1] = 0.5 * mo[t];
          } else {
            // max(a, b) = b + relu(a - b)
            const double w = relu_multiplier(a[2 * t] - a[2 * t + 1], a0[2 * t] - a0[2 * t + 1]);
            r[2 * t] = w * mo[t];
            r[2 * t + 1] = (1.0 - w) * mo[t];
          }
        }
      }
      m = std::move(mi);
    }
  }

  Result result;
  result.output = act.back().v[0];
  result.reference_output = ref.back().v[0];
  result.multipliers = std::move(m.v);
  result.attributions.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) result.attributions[k] = result.multipliers[k] * (x[k] - reference[k]);
  return result;
}

AttributionMap deeplift_attribute(InferenceGraph& graph, const ModelInput& input, std::span<const double> reference,
                                  std::string subject_id, std::string video_id) {
  if (graph.input_channels() != kNumChannels || graph.input_length() != input.length) {
    fail(ErrorCategory::Shape, "attribution: model expects length " + std::to_string(graph.input_length()) +
                                   ", input has " + std::to_string(input.length));
  }
  std::vector<double> ref(reference.begin(), reference.end());
  if (ref.empty()) ref.assign(input.values.size(), 0.0);
  if (ref.size() != input.values.size()) fail(ErrorCategory::Shape, "attribution: reference has wrong size");

  auto r = graph.deeplift(input.values, ref);
  AttributionMap a;
  a.subject_id = std::move(subject_id);
  a.video_id = std::move(video_id);
  a.length = input.length;
  a.true_length = input.true_length;
  a.values = std::move(r.attributions);
  a.reference = std::move(ref);
  a.output_delta = r.output - r.reference_output;
  return a;
}

AttributionMap normalize_instance(const AttributionMap& a) {
  AttributionMap out = a;
  std::fill(out.values.begin(), out.values.end(), 0.0);
  const std::size_t n = std::min(a.true_length, a.length);
  if (n == 0) return out;
  double lo = std::abs(a.at(0, 0));
  double hi = lo;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    for (std::size_t t = 0; t < n; ++t) {
      const double v = std::abs(a.at(c, t));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) return out;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    for (std::size_t t = 0; t < n; ++t) out.values[c * a.length + t] = (std::abs(a.at(c, t)) - lo) / (hi - lo);
  }
  return out;
}

BoxSummary summarize_box(std::vector<double> values) {
  BoxSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const double iqr = s.q3 - s.q1;
  s.lo_whisker = *std::lower_bound(values.begin(), values.end(), s.q1 - 1.5 * iqr);
  s.hi_whisker = *(std::upper_bound(values.begin(), values.end(), s.q3 + 1.5 * iqr) - 1);
  return s;
}

std::array<BoxSummary, kNumChannels> aggregate_channel_relevance(std::span<const AttributionMap> maps) {
  std::array<std::vector<double>, kNumChannels> pooled;
  for (const auto& m : maps) {
    const std::size_t n = std::min(m.true_length, m.length);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      for (std::size_t t = 0; t < n; ++t) pooled[c].push_back(m.at(c, t));
    }
  }
  std::array<BoxSummary, kNumChannels> out;
  for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = summarize_box(std::move(pooled[c]));
  return out;
}

std::string box_plot_csv_header() { return "video,channel,median,mean,q1,q3,lo_whisker,hi_whisker\n"; }

std::string box_plot_csv_rows(const std::string& video_id, const std::array<BoxSummary, kNumChannels>& summaries) {
  std::string out;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto& s = summaries[c];
    out += video_id + "," + std::string(channel_name(c)) + "," + format_double(s.median) + "," +
           format_double(s.mean) + "," + format_double(s.q1) + "," + format_double(s.q3) + "," +
           format_double(s.lo_whisker) + "," + format_double(s.hi_whisker) + "\n";
  }
  return out;
}

void write_attribution_dump(const std::filesystem::path& path, const AttributionMap& a) {
  FeatureTensorFile f;
  f.subject_id = a.subject_id;
  f.video_id = a.video_id;
  f.length = a.length;
  f.true_length = a.true_length;
  f.values = a.values;
  f.has_delta = true;
  f.delta = a.output_delta;
  write_feature_tensor(path, f);
}

}  // namespace gazenet::attribution
