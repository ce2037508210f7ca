#pragma once

#include <vector>

#include "evars/error.hpp"

namespace evars::cpd {

/// out[i] = series[i + n_seas] - series[i]; the output is n_seas shorter.
inline std::vector<double> seasonal_difference(const std::vector<double>& series, int n_seas) {
    if (n_seas < 1) fail(ErrorKind::Input, "season length must be >= 1");
    const auto s = static_cast<std::size_t>(n_seas);
    if (series.size() <= s) fail(ErrorKind::Input, "series must be longer than the season length");
    std::vector<double> out(series.size() - s);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = series[i + s] - series[i];
    return out;
}

/// Incremental seasonal differencing with a ring buffer of the last n_seas raw values.
class SeasonalDifferencer {
public:
    explicit SeasonalDifferencer(int n_seas) : buffer_(static_cast<std::size_t>(n_seas)) {
        if (n_seas < 1) fail(ErrorKind::Input, "season length must be >= 1");
    }

    /// Returns true and writes the difference once a full season has been seen.
    bool push(double y, double& difference) {
        const bool ready = seen_ >= buffer_.size();
        if (ready) difference = y - buffer_[head_];
        buffer_[head_] = y;
        head_ = (head_ + 1) % buffer_.size();
        ++seen_;
        return ready;
    }

    [[nodiscard]] std::size_t seen() const { return seen_; }

private:
    std::vector<double> buffer_;
    std::size_t head_ = 0;
    std::size_t seen_ = 0;
};

}  // namespace evars::cpd
