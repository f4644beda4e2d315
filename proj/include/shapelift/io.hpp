#pragma once

// File formats.
//
// Configuration CSV: one row per landmark, columns x,y[,z]; an optional
// non-numeric header row is skipped. Configuration JSON: {"landmarks":
// [[x, y], ...]}.
//
// Sample sets hold several configurations of equal size. CSV: columns
// sample,x,y[,z], rows grouped by the sample column in order of first
// appearance, landmark order = row order. JSON: {"samples": [{"landmarks":
// ...}, ...]} or a bare array of landmark arrays.
//
// Numbers are written with 17 significant digits so that reading a written
// file reproduces every double exactly.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapelift/frechet.hpp"
#include "shapelift/geometry.hpp"
#include "shapelift/two_sample.hpp"

namespace shapelift::io {

/// Shortest-round-trip-safe text form (17 significant digits).
std::string format_double(double x);

/// Parses a whole field as a double; throws MalformedData naming `where`.
double parse_double(std::string_view text, const std::string& where);

/// Splits a CSV line on commas, trimming blanks around each field.
std::vector<std::string> split_csv(std::string_view line);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

Configuration read_configuration(const std::filesystem::path& path);
void write_configuration(const std::filesystem::path& path, const Configuration& c);

std::vector<Configuration> read_samples(const std::filesystem::path& path);
void write_samples(const std::filesystem::path& path, const std::vector<Configuration>& samples);

/// Landmark matrix from a JSON array of points ([[x, y], ...]).
Mat landmarks_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json landmarks_to_json(const Mat& c);

nlohmann::json to_json(const TestOutcome& outcome);
nlohmann::json to_json(const MeanResult& result);

}  // namespace shapelift::io
