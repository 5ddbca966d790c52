#pragma once

#include <string>
#include <vector>

#include "gss/signal.hpp"

namespace gss::wav {

enum class SampleFormat { Pcm16, Float32 };

/// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float samples.
/// PCM is scaled to [-1, 1).
WaveformSegment read(const std::string& path);

/// Reads several files that together form one array and stacks their
/// channels in file order. All files must share rate and length.
WaveformSegment read_array(const std::vector<std::string>& paths);

void write(const std::string& path, const WaveformSegment& x,
           SampleFormat format = SampleFormat::Float32);

}  // namespace gss::wav
