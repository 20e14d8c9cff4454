#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

namespace testsupport {

// Scratch directory removed when the fixture goes out of scope.
class TmpDir {
public:
    explicit TmpDir(const std::string& tag = "mirsom") {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TmpDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TmpDir(const TmpDir&) = delete;
    TmpDir& operator=(const TmpDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
