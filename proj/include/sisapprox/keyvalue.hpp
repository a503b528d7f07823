#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sisapprox {

/// Ordered "key: value" document, one entry per line; '#' starts a comment.
class KeyValueDocument {
public:
    static KeyValueDocument parse(const std::string& text, const std::string& origin = "<text>");
    static KeyValueDocument read(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, std::size_t value) { set(key, static_cast<long long>(value)); }
    void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::string to_string() const;
    void write(const std::filesystem::path& path) const;

private:
    std::string origin_ = "<document>";
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

/// Writes bytes to a file, creating parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sisapprox
