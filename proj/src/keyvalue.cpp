#include "sisapprox/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sisapprox/error.hpp"

namespace sisapprox {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueDocument KeyValueDocument::parse(const std::string& text, const std::string& origin) {
    KeyValueDocument doc;
    doc.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto colon = body.find(':');
        if (colon == std::string::npos) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": expected 'key: value'");
        }
        doc.entries_.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
    }
    return doc;
}

KeyValueDocument KeyValueDocument::read(const std::filesystem::path& path) {
    return parse(read_text_file(path), path.string());
}

void KeyValueDocument::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KeyValueDocument::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValueDocument::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

bool KeyValueDocument::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& KeyValueDocument::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    throw InputError(origin_ + ": missing field '" + key + "'");
}

long long KeyValueDocument::get_int(const std::string& key) const {
    const std::string& v = get(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw InputError(origin_ + ": field '" + key + "' is not an integer: '" + v + "'");
    }
    return out;
}

double KeyValueDocument::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used == v.size()) return out;
    } catch (const std::exception&) {
    }
    throw InputError(origin_ + ": field '" + key + "' is not a number: '" + v + "'");
}

std::string KeyValueDocument::to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + ": " + v + "\n";
    return out;
}

void KeyValueDocument::write(const std::filesystem::path& path) const { write_text_file(path, to_string()); }

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace sisapprox
