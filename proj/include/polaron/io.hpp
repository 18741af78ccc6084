#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "polaron/dynamics.hpp"

namespace polaron {

// one NDJSON report record: {name, value, threshold, pass, window}
struct CheckRecord {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string window;  // free-form window/context note
};

// atomic file write (temp + rename)
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

void write_ndjson_report(const std::filesystem::path& path,
                         const std::vector<CheckRecord>& records);

// columns: t,X1..X3,P1..P3,energy,mom1..mom3,re_delta_linf,im_delta_linf
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

// two-column CSV for plot-ready series
void write_series_csv(const std::filesystem::path& path, const std::string& xname,
                      const std::string& yname, const std::vector<double>& x,
                      const std::vector<double>& y);

// field snapshot: magic "PLF1", LE u32 N, f64 L, f64 t, N^3 interleaved f64
// (re, im) in x-fastest order; payload is the physical representation
void write_field_plf1(const std::filesystem::path& path, const ComplexField& field, double t);
ComplexField read_field_plf1(const std::filesystem::path& path, double* t_out = nullptr);

}  // namespace polaron
