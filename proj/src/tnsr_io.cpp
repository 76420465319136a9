#include "sedkit/tnsr_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace sedkit {

namespace {

static_assert(sizeof(float) == 4, "requires 32-bit float");

void to_little_endian(std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::big) {
        for (auto& f : v) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = ((u & 0xff) << 24) | ((u & 0xff00) << 8) | ((u >> 8) & 0xff00) | (u >> 24);
            std::memcpy(&f, &u, 4);
        }
    }
}

std::string sanitize_filename(const std::string& name) {
    std::string out = name;
    for (auto& c : out)
        if (c == '/' || c == '\\' || c == ':') c = '_';
    return out;
}

}  // namespace

void write_tnsr(const std::string& path, const TensorF& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_tnsr: cannot open " + path);
    os << "TNSR v1 " << t.ndim();
    for (int a = 0; a < t.ndim(); ++a) os << ' ' << t.dim(a);
    os << '\n';
    std::vector<float> payload(t.data(), t.data() + t.numel());
    to_little_endian(payload);
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size() * 4));
    if (!os) throw std::runtime_error("write_tnsr: write failed for " + path);
}

TensorF read_tnsr(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_tnsr: cannot open " + path);
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("read_tnsr: missing header in " + path);
    std::istringstream hs(header);
    std::string magic, version;
    int ndims = -1;
    hs >> magic >> version >> ndims;
    if (magic != "TNSR" || version != "v1")
        throw std::runtime_error("read_tnsr: bad magic in " + path);
    if (ndims < 1 || ndims > 8) throw std::runtime_error("read_tnsr: bad rank in " + path);
    std::vector<int> dims(ndims);
    std::size_t n = 1;
    for (int a = 0; a < ndims; ++a) {
        if (!(hs >> dims[a]) || dims[a] < 1)
            throw std::runtime_error("read_tnsr: bad extent in " + path);
        n *= static_cast<std::size_t>(dims[a]);
    }
    std::string trailing;
    if (hs >> trailing) throw std::runtime_error("read_tnsr: trailing header tokens in " + path);
    std::vector<float> payload(n);
    is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(n * 4));
    if (static_cast<std::size_t>(is.gcount()) != n * 4)
        throw std::runtime_error("read_tnsr: truncated payload in " + path);
    char extra;
    if (is.read(&extra, 1)) throw std::runtime_error("read_tnsr: trailing bytes in " + path);
    to_little_endian(payload);
    return TensorF::from_data(dims, payload);
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_manifest: cannot open " + path);
    for (const auto& e : entries) {
        if (e.name.find('\t') != std::string::npos || e.name.find('\n') != std::string::npos)
            throw std::invalid_argument("write_manifest: name contains tab or newline: " + e.name);
        os << e.name << '\t' << e.file << '\n';
    }
    if (!os) throw std::runtime_error("write_manifest: write failed for " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_manifest: cannot open " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("read_manifest: malformed line in " + path + ": " + line);
        entries.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return entries;
}

void save_tensors(const std::string& dir,
                  const std::vector<std::pair<std::string, const TensorF*>>& tensors) {
    fs::create_directories(dir);
    std::vector<ManifestEntry> entries;
    entries.reserve(tensors.size());
    for (const auto& [name, t] : tensors) {
        const std::string file = sanitize_filename(name) + ".tnsr";
        write_tnsr((fs::path(dir) / file).string(), *t);
        entries.push_back({name, file});
    }
    write_manifest((fs::path(dir) / "manifest.txt").string(), entries);
}

std::vector<std::pair<std::string, TensorF>> load_tensors(const std::string& dir) {
    const auto entries = read_manifest((fs::path(dir) / "manifest.txt").string());
    std::vector<std::pair<std::string, TensorF>> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
        out.emplace_back(e.name, read_tnsr((fs::path(dir) / e.file).string()));
    return out;
}

}  // namespace sedkit
