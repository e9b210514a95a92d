#pragma once

#include <array>
#include <string>

#include "aopath/common.hpp"
#include "aopath/tensor.hpp"

namespace aopath {

inline constexpr std::size_t kNumCandidates = 5;

// One multiple-choice question: per-candidate audio (D) and text (T)
// features, the raw subtitle, the gold answer index and genre tags.
struct QARecord {
    std::string id;
    std::array<Tensor, kNumCandidates> audio;  // D
    std::array<Tensor, kNumCandidates> text;   // T
    std::string subtitle;
    std::size_t gold = 0;
    std::string genre;
    std::string series;

    void validate() const {
        if (gold >= kNumCandidates)
            throw DataError("record " + id + ": gold index out of range");
        for (std::size_t i = 0; i < kNumCandidates; ++i) {
            if (!all_finite(audio[i]) || !all_finite(text[i]))
                throw DataError("record " + id + ": non-finite feature");
        }
    }
};

}  // namespace aopath
