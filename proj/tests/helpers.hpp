#ifndef STEPGNR_TEST_HELPERS_HPP
#define STEPGNR_TEST_HELPERS_HPP

#include "stepgnr/geometry.hpp"

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testing {

/// Random (H, CR, theta) triple that fits the given channel; roughly a third
/// of the draws land in the clamped regime.
struct Triple {
    double h, cr, theta;
};

inline Triple random_triple(std::mt19937_64& rng, double channel_length, double a_cc = stepgnr::kDefaultBondLength) {
    std::uniform_real_distribution<double> cr_d(0.3, 3.2), th_d(5.0, 90.0), h_d(0.05, 2.5);
    for (;;) {
        const Triple t{h_d(rng), cr_d(rng), th_d(rng)};
        try {
            stepgnr::resolve_profile(t.h, t.cr, t.theta, channel_length, a_cc);
            return t;
        } catch (const stepgnr::ValidationError&) {
        }
    }
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("stepgnr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing

#endif
