#include "polaron/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace polaron {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_ndjson_report(const fs::path& path, const std::vector<CheckRecord>& records) {
    std::ostringstream os;
    for (const auto& r : records) {
        nlohmann::json j{{"name", r.name},
                         {"value", r.value},
                         {"threshold", r.threshold},
                         {"pass", r.pass},
                         {"window", r.window}};
        os << j.dump() << "\n";
    }
    write_text_atomic(path, os.str());
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    std::ostringstream os;
    os.precision(17);
    os << "t,X1,X2,X3,P1,P2,P3,energy,mom1,mom2,mom3,re_delta_linf,im_delta_linf\n";
    for (const auto& s : traj.samples) {
        os << s.t << ',' << s.X.x << ',' << s.X.y << ',' << s.X.z << ',' << s.P.x << ','
           << s.P.y << ',' << s.P.z << ',' << s.energy << ',' << s.momentum.x << ','
           << s.momentum.y << ',' << s.momentum.z << ',' << s.re_delta_linf << ','
           << s.im_delta_linf << "\n";
    }
    write_text_atomic(path, os.str());
}

void write_series_csv(const fs::path& path, const std::string& xname,
                      const std::string& yname, const std::vector<double>& x,
                      const std::vector<double>& y) {
    std::ostringstream os;
    os.precision(17);
    os << xname << ',' << yname << "\n";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        os << x[i] << ',' << y[i] << "\n";
    write_text_atomic(path, os.str());
}

void write_field_plf1(const fs::path& path, const ComplexField& field, double t) {
    ComplexField phys = to_physical(field);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write("PLF1", 4);
        std::uint32_t n = std::uint32_t(phys.grid()->n());
        double L = phys.grid()->length();
        out.write(reinterpret_cast<const char*>(&n), 4);
        out.write(reinterpret_cast<const char*>(&L), 8);
        out.write(reinterpret_cast<const char*>(&t), 8);
        out.write(reinterpret_cast<const char*>(phys.data().data()),
                  std::streamsize(phys.size() * sizeof(cplx)));
    }
    fs::rename(tmp, path);
}

ComplexField read_field_plf1(const fs::path& path, double* t_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "PLF1", 4) != 0)
        throw std::runtime_error("bad field snapshot magic in " + path.string());
    std::uint32_t n = 0;
    double L = 0.0, t = 0.0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&L), 8);
    in.read(reinterpret_cast<char*>(&t), 8);
    ComplexField f(make_grid(int(n), L), Representation::Physical);
    in.read(reinterpret_cast<char*>(f.data().data()), std::streamsize(f.size() * sizeof(cplx)));
    if (!in) throw std::runtime_error("truncated field snapshot " + path.string());
    if (t_out) *t_out = t;
    return f;
}

}  // namespace polaron
