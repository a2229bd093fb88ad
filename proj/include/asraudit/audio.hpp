#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace asraudit {

struct AudioBuffer {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  std::uint32_t sample_rate = 0;

  double duration_s() const {
    return sample_rate == 0 ? 0.0
                            : static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads RIFF/WAVE with 8/16/24/32-bit integer PCM or 32/64-bit float samples
// (including WAVE_FORMAT_EXTENSIBLE). Multi-channel audio is downmixed by
// averaging channels. Throws InputError on anything else.
AudioBuffer read_wav(const std::filesystem::path& path);

enum class WavEncoding { pcm16, float32 };

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::pcm16);

}  // namespace asraudit
