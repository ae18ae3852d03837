// tdsb/dsp/wav.h

// Copyright 2026  The tdspkbeam Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDSB_DSP_WAV_H_
#define TDSB_DSP_WAV_H_

#include <string>

#include "tdsb/dsp/audio.h"

namespace tdsb {

/// Reads a RIFF/WAVE file holding 16-bit PCM with one or two channels.
/// Throws DataError naming the offending field on malformed headers or
/// unsupported encodings.
AudioSignal ReadWav(const std::string &path);

/// Writes 16-bit PCM, clipping samples to [-1, 1]. read(write(x)) matches x
/// within 1/32768 per sample.
void WriteWav(const std::string &path, const AudioSignal &signal);

}  // namespace tdsb

#endif  // TDSB_DSP_WAV_H_
