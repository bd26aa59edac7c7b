#include "moodpipe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace moodpipe {

namespace {

constexpr std::size_t kMaxPositives = 7;

std::size_t count(const LabelBits& b) {
  std::size_t n = 0;
  for (auto v : b) n += v;
  return n;
}

}  // namespace

std::vector<AnnotationRecord> deal_annotations(std::uint32_t track_id, Genre genre, const LabelBits& labels,
                                               std::size_t annotators) {
  const double n = static_cast<double>(annotators);
  const auto pos_copies = static_cast<std::size_t>(std::ceil(0.36 * n));
  const auto neg_copies = static_cast<std::size_t>(std::ceil(0.12 * n));
  std::vector<std::size_t> deck;
  for (std::size_t e = 0; e < kEmotionCount; ++e) deck.insert(deck.end(), labels[e] ? pos_copies : neg_copies, e);
  if (annotators < 10 || deck.size() > kMaxSelections * annotators || deck.size() < annotators)
    throw InputError("cannot deal annotations for track " + std::to_string(track_id));
  std::vector<AnnotationRecord> out(annotators);
  for (auto& r : out) {
    r.track_id = track_id;
    r.genre = genre;
  }
  for (std::size_t i = 0; i < deck.size(); ++i) out[i % annotators].selections.set(deck[i]);
  return out;
}

SynthCorpus plan_corpus(const SynthOptions& options) {
  if (options.tracks < 8) throw InputError("synthetic corpus needs at least 8 tracks");
  SynthCorpus c;
  c.options = options;
  Rng rng(options.seed);
  std::vector<AnnotationRecord> records;
  for (std::size_t t = 0; t < options.tracks; ++t) {
    SynthTrack tr;
    tr.track_id = static_cast<std::uint32_t>(t + 1);
    tr.genre = static_cast<Genre>(t % 4);
    tr.seed = rng.next();
    for (std::size_t e = 0; e < kEmotionCount; ++e) tr.audio_labels[e] = rng.uniform() < options.prevalence;
    while (count(tr.audio_labels) > kMaxPositives) {
      tr.audio_labels[static_cast<std::size_t>(rng.below(kEmotionCount))] = 0;
    }
    tr.annotated_labels = tr.audio_labels;
    for (std::size_t e = 0; e < kEmotionCount; ++e)
      if (rng.uniform() < options.label_noise) tr.annotated_labels[e] ^= 1;
    while (count(tr.annotated_labels) > kMaxPositives) {
      const auto e = static_cast<std::size_t>(rng.below(kEmotionCount));
      if (tr.annotated_labels[e] && !tr.audio_labels[e]) tr.annotated_labels[e] = 0;
    }
    const double secs = options.seconds + options.length_jitter * rng.uniform();
    tr.samples = static_cast<std::size_t>(secs * options.sample_rate);
    // a few more or fewer listeners per track
    const std::size_t listeners = options.annotators + static_cast<std::size_t>(rng.below(5));
    auto recs = deal_annotations(tr.track_id, tr.genre, tr.annotated_labels, listeners);
    records.insert(records.end(), recs.begin(), recs.end());
    c.tracks.push_back(tr);
  }
  c.annotations = AnnotationTable(std::move(records));
  return c;
}

AudioClip render_track(const SynthTrack& track, const SynthOptions& options) {
  const auto& y = track.audio_labels;
  const auto on = [&](Emotion e) { return y[index_of(e)] != 0; };
  Rng rng(track.seed);
  const double sr = options.sample_rate;
  const double two_pi = 2.0 * std::numbers::pi;

  const double gain = (on(Emotion::kAmazement) ? 0.8 : 0.12) * rng.uniform(0.9, 1.1);
  const double f0 = (on(Emotion::kSolemnity) ? 220.0 : 660.0) * rng.uniform(0.97, 1.03);
  const std::size_t harmonics = on(Emotion::kTenderness) ? 1 : 6;
  const double noise = on(Emotion::kCalmness) ? 0.35 : 0.0;
  const double hf = on(Emotion::kPower) ? 0.3 : 0.0;
  const double hf_freq = 6000.0 * rng.uniform(0.97, 1.03);
  const double trem_rate = 0.4 * rng.uniform(0.9, 1.1);
  const double gate_rate = 6.0 * rng.uniform(0.9, 1.1);
  const double note_len = 0.75;

  std::vector<double> phases(harmonics);
  for (auto& p : phases) p = rng.uniform(0.0, two_pi);
  double hf_phase = rng.uniform(0.0, two_pi);
  const double trem_phase = rng.uniform(0.0, two_pi);
  const double gate_phase = rng.uniform();
  double harm_norm = 0.0;
  for (std::size_t h = 1; h <= harmonics; ++h) harm_norm += 1.0 / static_cast<double>(h);

  AudioClip clip;
  clip.sample_rate = options.sample_rate;
  clip.samples.resize(track.samples);
  const double total = static_cast<double>(track.samples) / sr;
  for (std::size_t i = 0; i < track.samples; ++i) {
    const double t = static_cast<double>(i) / sr;
    double f = f0;
    if (on(Emotion::kJoyfulActivation) && static_cast<long>(t / note_len) % 2 == 1) f *= 1.26;
    double tone = 0.0;
    for (std::size_t h = 1; h <= harmonics; ++h) {
      phases[h - 1] += two_pi * f * static_cast<double>(h) / sr;
      if (phases[h - 1] > two_pi) phases[h - 1] -= two_pi;
      tone += std::sin(phases[h - 1]) / static_cast<double>(h);
    }
    tone = 0.55 * tone / harm_norm;
    hf_phase += two_pi * hf_freq / sr;
    if (hf_phase > two_pi) hf_phase -= two_pi;
    double s = tone + hf * std::sin(hf_phase) + noise * (2.0 * rng.uniform() - 1.0);

    double env = 1.0;
    if (on(Emotion::kNostalgia)) env *= 1.0 - 0.8 * (0.5 + 0.5 * std::sin(two_pi * trem_rate * t + trem_phase));
    if (on(Emotion::kTension)) env *= std::fmod(gate_rate * t + gate_phase, 1.0) < 0.5 ? 1.0 : 0.0;
    if (on(Emotion::kSadness)) env *= std::exp(-3.0 * t / total);
    clip.samples[i] = std::clamp(gain * env * s, -1.0, 1.0);
  }
  return clip;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "audio");
  {
    std::ofstream out(dir / "annotations.csv");
    if (!out) throw InputError("cannot write " + (dir / "annotations.csv").string());
    write_annotations(out, corpus.annotations);
  }
  for (int g = 0; g < 4; ++g)
    std::filesystem::create_directories(dir / "audio" / std::string(genre_name(static_cast<Genre>(g))));
  const auto n = static_cast<std::ptrdiff_t>(corpus.tracks.size());
  std::vector<std::string> errors(corpus.tracks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& tr = corpus.tracks[static_cast<std::size_t>(i)];
    try {
      const AudioClip clip = render_track(tr, corpus.options);
      write_wav(dir / "audio" / std::string(genre_name(tr.genre)) / (std::to_string(tr.track_id) + ".wav"),
                {clip.samples}, clip.sample_rate, SampleFormat::kPcm16);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);
}

}  // namespace moodpipe
