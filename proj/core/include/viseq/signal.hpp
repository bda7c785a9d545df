#pragma once

#include <optional>
#include <string>
#include <vector>

#include "viseq/game.hpp"
#include "viseq/rng.hpp"

namespace viseq {

enum class VisType { Bar, Hops };

struct SignalScheme {
  enum class Variant { Exact, BinomialSample, FrameSequence };
  Variant variant = Variant::Exact;
  int sample_size = 30;   // displayed prior decisions per frame
  int frame_count = 30;   // FrameSequence only
};

struct Frame {
  int count_a = 0;
  int count_b = 0;
};

struct Signal {
  Proportion displayed_prop = 0.0;
  int sample_size = 30;
  std::optional<std::vector<Frame>> frames;
  Proportion source_prediction = 0.0;  // the prediction that generated the display
};

// Turns a predicted proportion into displayed evidence. Exact rounds to the
// nearest count with ties-to-even; BinomialSample draws one count;
// FrameSequence draws frame_count independent counts and reports their mean.
Signal render(const SignalScheme& scheme, Proportion p_hat, RngStream& rng);

// The headline proportion an agent reads off: mean frame proportion when
// frames are present, the displayed proportion otherwise.
Proportion expected_proportion(const Signal& signal);

// Fraction of frames where location A pays strictly more; ties count 0.5.
Proportion frame_win_fraction(const Signal& signal, const CongestionGame& game);

// {"prop": number, "n": int, "frames": [[a,b],...]|null, "p_hat": number}
std::string signal_to_json(const Signal& signal);
Signal signal_from_json(const std::string& text);

}  // namespace viseq
