#include "fsi/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fsi {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_row(const std::vector<double>& values) {
    std::string s;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        s += format_double(values[i]);
    }
    s += '\n';
    return s;
}

std::string csv_header(const std::vector<std::string>& names) {
    std::string s;
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) s += ',';
        s += names[i];
    }
    s += '\n';
    return s;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), (std::streamsize)content.size());
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

namespace {

template <class T>
void put(std::string& s, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    s.append(b, sizeof(T));
}

struct Reader {
    const std::string& s;
    size_t pos = 0;
    template <class T>
    T get() {
        if (pos + sizeof(T) > s.size()) throw InvalidInput("checkpoint truncated");
        T v;
        std::memcpy(&v, s.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
};

constexpr std::uint32_t checkpoint_version = 1;

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Grid& g, const SystemState& st) {
    if ((int)st.u.size() != g.nfaces()) throw InvalidInput("state does not match the grid");
    std::string s = "FSIP";
    put<std::uint32_t>(s, checkpoint_version);
    put<std::int32_t>(s, g.n);
    put<double>(s, g.R);
    put<double>(s, st.time);
    for (double v : st.u) put<double>(s, v);
    for (int c = 0; c < g.ncells(); ++c) put<double>(s, c < (int)st.p.size() ? st.p[c] : 0.0);
    for (double v : {st.s.xi[0], st.s.xi[1], st.s.delta[0], st.s.delta[1], st.s.omega, st.s.theta})
        put<double>(s, v);
    write_file_atomic(path, s);
}

SystemState read_checkpoint(const std::filesystem::path& path, const Grid& g) {
    const std::string s = read_file(path);
    if (s.size() < 4 || s.compare(0, 4, "FSIP") != 0) throw InvalidInput("not a checkpoint: " + path.string());
    Reader r{s, 4};
    if (r.get<std::uint32_t>() != checkpoint_version) throw InvalidInput("unsupported checkpoint version");
    int n = r.get<std::int32_t>();
    double R = r.get<double>();
    if (n != g.n || R != g.R) throw InvalidInput("checkpoint grid does not match");
    SystemState st;
    st.time = r.get<double>();
    st.u.resize(g.nfaces());
    for (auto& x : st.u) x = r.get<double>();
    st.p.resize(g.ncells());
    for (auto& x : st.p) x = r.get<double>();
    double v[6];
    for (double& x : v) x = r.get<double>();
    if (r.pos != s.size()) throw InvalidInput("checkpoint has trailing bytes");
    st.s.xi = Vec2(v[0], v[1]);
    st.s.delta = Vec2(v[2], v[3]);
    st.s.omega = v[4];
    st.s.theta = v[5];
    return st;
}

}  // namespace fsi
