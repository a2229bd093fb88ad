#include "asraudit/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "asraudit/error.hpp"

namespace asraudit {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}
void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}

double decode(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      std::uint32_t v = u32(p);
      std::memcpy(&f, &v, 4);
      return f;
    }
    std::uint64_t v = u32(p) | (static_cast<std::uint64_t>(u32(p + 4)) << 32);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  switch (bits) {
    case 8: return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: return static_cast<std::int16_t>(u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32: return static_cast<std::int32_t>(u32(p)) / 2147483648.0;
  }
  return 0.0;
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open audio file " + path.string());
  const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  auto bad = [&](const std::string& why) {
    return InputError(path.string() + ": " + why);
  };
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    throw bad("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::size_t size = u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, data.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw bad("truncated fmt chunk");
      format = u16(chunk + 8);
      channels = u16(chunk + 10);
      rate = u32(chunk + 12);
      bits = u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 26) throw bad("truncated extensible fmt chunk");
        format = u16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = chunk + 8;
      pcm_bytes = avail;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0) throw bad("missing fmt chunk");
  if (!pcm) throw bad("missing data chunk");
  const bool ok_pcm = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool ok_float = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!ok_pcm && !ok_float)
    throw bad("unsupported sample format " + std::to_string(format) + "/" +
              std::to_string(bits) + " bit");

  const std::size_t width = bits / 8;
  const std::size_t frame = width * channels;
  const std::size_t frames = pcm_bytes / frame;
  AudioBuffer out;
  out.sample_rate = rate;
  out.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c)
      acc += decode(pcm + f * frame + c * width, format, bits);
    out.samples[f] = acc / channels;
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t bytes = static_cast<std::uint32_t>(audio.samples.size() * bits / 8);
  std::string out;
  out.reserve(44 + bytes);
  out += "RIFF";
  put_u32(out, 36 + bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, audio.sample_rate);
  put_u32(out, audio.sample_rate * bits / 8);
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out += "data";
  put_u32(out, bytes);
  for (double s : audio.samples) {
    if (encoding == WavEncoding::pcm16) {
      const double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32768.0))));
    } else {
      const float f = static_cast<float>(s);
      std::uint32_t v;
      std::memcpy(&v, &f, 4);
      put_u32(out, v);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write audio file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace asraudit
