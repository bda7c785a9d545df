#include "viseq/signal.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "viseq/errors.hpp"

namespace viseq {

namespace {

void check_scheme(const SignalScheme& scheme) {
  if (scheme.sample_size < 1) {
    throw std::invalid_argument("sample_size must be >= 1");
  }
  if (scheme.variant == SignalScheme::Variant::FrameSequence && scheme.frame_count < 1) {
    throw std::invalid_argument("frame_count must be >= 1");
  }
}

double round_half_even(double x) {
  const double floor_x = std::floor(x);
  const double frac = x - floor_x;
  if (frac > 0.5) return floor_x + 1.0;
  if (frac < 0.5) return floor_x;
  return std::fmod(floor_x, 2.0) == 0.0 ? floor_x : floor_x + 1.0;
}

}  // namespace

Signal render(const SignalScheme& scheme, Proportion p_hat, RngStream& rng) {
  check_scheme(scheme);
  require_proportion(p_hat, "p_hat");
  const int n = scheme.sample_size;
  Signal out;
  out.sample_size = n;
  out.source_prediction = p_hat;
  switch (scheme.variant) {
    case SignalScheme::Variant::Exact: {
      out.displayed_prop = round_half_even(p_hat * n) / n;
      break;
    }
    case SignalScheme::Variant::BinomialSample: {
      out.displayed_prop = static_cast<double>(rng.binomial(n, p_hat)) / n;
      break;
    }
    case SignalScheme::Variant::FrameSequence: {
      std::vector<Frame> frames(static_cast<std::size_t>(scheme.frame_count));
      long long total = 0;
      for (auto& frame : frames) {
        frame.count_a = rng.binomial(n, p_hat);
        frame.count_b = n - frame.count_a;
        total += frame.count_a;
      }
      out.displayed_prop = static_cast<double>(total) / (static_cast<double>(scheme.frame_count) * n);
      out.frames = std::move(frames);
      break;
    }
  }
  return out;
}

Proportion expected_proportion(const Signal& signal) {
  if (signal.frames && !signal.frames->empty()) {
    double total = 0.0;
    for (const Frame& frame : *signal.frames) {
      total += static_cast<double>(frame.count_a) / signal.sample_size;
    }
    return total / static_cast<double>(signal.frames->size());
  }
  return signal.displayed_prop;
}

Proportion frame_win_fraction(const Signal& signal, const CongestionGame& game) {
  if (!signal.frames || signal.frames->empty()) {
    throw NoFrames("signal has no frame sequence");
  }
  double wins = 0.0;
  for (const Frame& frame : *signal.frames) {
    const double diff =
        game.payoff_difference(static_cast<double>(frame.count_a) / signal.sample_size);
    if (diff > 0.0) {
      wins += 1.0;
    } else if (diff == 0.0) {
      wins += 0.5;
    }
  }
  return wins / static_cast<double>(signal.frames->size());
}

std::string signal_to_json(const Signal& signal) {
  nlohmann::json j;
  j["prop"] = signal.displayed_prop;
  j["n"] = signal.sample_size;
  if (signal.frames) {
    nlohmann::json frames = nlohmann::json::array();
    for (const Frame& frame : *signal.frames) {
      frames.push_back({frame.count_a, frame.count_b});
    }
    j["frames"] = std::move(frames);
  } else {
    j["frames"] = nullptr;
  }
  j["p_hat"] = signal.source_prediction;
  return j.dump();
}

Signal signal_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad signal json: ") + e.what());
  }
  if (!j.contains("prop") || !j.contains("n") || !j.contains("p_hat") || !j.contains("frames")) {
    throw SchemaError("signal json needs prop, n, frames, p_hat");
  }
  Signal out;
  out.displayed_prop = require_proportion(j["prop"].get<double>(), "prop");
  out.sample_size = j["n"].get<int>();
  out.source_prediction = require_proportion(j["p_hat"].get<double>(), "p_hat");
  if (out.sample_size < 1) {
    throw SchemaError("signal json n must be >= 1");
  }
  if (!j["frames"].is_null()) {
    std::vector<Frame> frames;
    for (const auto& row : j["frames"]) {
      if (!row.is_array() || row.size() != 2) {
        throw SchemaError("each frame must be an [a, b] pair");
      }
      Frame frame{row[0].get<int>(), row[1].get<int>()};
      if (frame.count_a < 0 || frame.count_b < 0 || frame.count_a + frame.count_b != out.sample_size) {
        throw SchemaError("frame counts must be nonnegative and sum to n");
      }
      frames.push_back(frame);
    }
    out.frames = std::move(frames);
  }
  return out;
}

}  // namespace viseq
