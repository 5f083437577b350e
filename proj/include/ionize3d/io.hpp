#ifndef IONIZE3D_IO_HPP
#define IONIZE3D_IO_HPP

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace ionize3d {

using ordered_json = nlohmann::ordered_json;

/// Column-major table: the first column is always time.
struct Table {
	std::vector<std::string> header;
	std::vector<std::vector<double>> columns;

	std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline std::string format_double(double v)
{
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

inline void ensure_directory(const std::filesystem::path& dir)
{
	std::error_code ec;
	std::filesystem::create_directories(dir, ec);
	if (ec) throw Error(ErrorCode::Io, dir.string() + ": " + ec.message());
}

inline void write_csv(const std::filesystem::path& path, const Table& t)
{
	if (t.header.empty() || t.header.front() != "t")
		throw Error(ErrorCode::InvalidArgument, path.string() + ": first column must be t");
	if (t.header.size() != t.columns.size())
		throw Error(ErrorCode::InvalidArgument, path.string() + ": header and column count differ");
	for (const auto& c : t.columns)
		if (c.size() != t.rows()) throw Error(ErrorCode::InvalidArgument, path.string() + ": ragged columns");
	std::ofstream out(path, std::ios::binary);
	if (!out) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
	for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
	out << '\n';
	for (std::size_t r = 0; r < t.rows(); ++r) {
		for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << format_double(t.columns[c][r]);
		out << '\n';
	}
	if (!out) throw Error(ErrorCode::Io, path.string() + ": write failed");
}

inline Table read_csv(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) throw Error(ErrorCode::Io, path.string() + ": cannot open for reading");
	Table t;
	std::string line;
	if (!std::getline(in, line)) throw Error(ErrorCode::Io, path.string() + ": missing header");
	{
		std::stringstream ss(line);
		std::string cell;
		while (std::getline(ss, cell, ',')) t.header.push_back(cell);
	}
	t.columns.assign(t.header.size(), {});
	std::size_t lineno = 1;
	while (std::getline(in, line)) {
		++lineno;
		if (line.empty()) continue;
		std::stringstream ss(line);
		std::string cell;
		std::size_t c = 0;
		while (std::getline(ss, cell, ',')) {
			if (c >= t.columns.size()) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(lineno) + ": too many cells");
			errno = 0;
			char* end = nullptr;
			const double v = std::strtod(cell.c_str(), &end);
			// ERANGE on underflow still yields the right subnormal
			if (end == cell.c_str() || *end != '\0' || (errno == ERANGE && std::isinf(v)))
				throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
			t.columns[c++].push_back(v);
		}
		if (c != t.columns.size()) throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(lineno) + ": too few cells");
	}
	return t;
}

inline void write_json(const std::filesystem::path& path, const ordered_json& j)
{
	std::ofstream out(path, std::ios::binary);
	if (!out) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
	out << j.dump(2) << '\n';
	if (!out) throw Error(ErrorCode::Io, path.string() + ": write failed");
}

inline ordered_json read_json(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) throw Error(ErrorCode::Io, path.string() + ": cannot open for reading");
	try {
		return ordered_json::parse(in);
	} catch (const nlohmann::json::exception& e) {
		throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
	}
}

} // namespace ionize3d

#endif // IONIZE3D_IO_HPP
