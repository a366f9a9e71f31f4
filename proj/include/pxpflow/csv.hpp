#pragma once

// Minimal numeric CSV tables: one header row, 12 significant digits.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pxpflow {

class IoError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

[[nodiscard]] inline std::string format_number(double value)
{
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value); // no "-0"
	return buf;
}

struct CsvTable {
	std::vector<std::string> header;
	std::vector<std::vector<double>> rows;

	[[nodiscard]] std::size_t column(const std::string& name) const
	{
		for(std::size_t k = 0; k < header.size(); ++k) {
			if(header[k] == name) {
				return k;
			}
		}
		throw std::out_of_range("no column '" + name + "'");
	}

	[[nodiscard]] std::vector<double> values(std::size_t col) const
	{
		std::vector<double> out;
		out.reserve(rows.size());
		for(const auto& row : rows) {
			out.push_back(row.at(col));
		}
		return out;
	}
};

/// Writes `columns` side by side; all columns must have equal length.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns)
{
	if(header.size() != columns.size()) {
		throw std::invalid_argument("header and column counts differ for " + path);
	}
	const std::size_t n_rows = columns.empty() ? 0 : columns.front().size();
	for(const auto& c : columns) {
		if(c.size() != n_rows) {
			throw std::invalid_argument("ragged columns for " + path);
		}
	}
	std::ofstream os(path, std::ios::binary | std::ios::trunc);
	if(!os) {
		throw IoError("cannot open " + path + " for writing");
	}
	for(std::size_t k = 0; k < header.size(); ++k) {
		os << (k ? "," : "") << header[k];
	}
	os << '\n';
	for(std::size_t r = 0; r < n_rows; ++r) {
		for(std::size_t k = 0; k < columns.size(); ++k) {
			os << (k ? "," : "") << format_number(columns[k][r]);
		}
		os << '\n';
	}
	if(!os) {
		throw IoError("failed writing " + path);
	}
}

[[nodiscard]] inline CsvTable read_csv(const std::string& path)
{
	std::ifstream is(path, std::ios::binary);
	if(!is) {
		throw IoError("cannot open " + path);
	}
	CsvTable table;
	std::string line;
	if(!std::getline(is, line)) {
		throw IoError(path + " is empty");
	}
	{
		std::stringstream ss(line);
		std::string cell;
		while(std::getline(ss, cell, ',')) {
			table.header.push_back(cell);
		}
	}
	while(std::getline(is, line)) {
		if(line.empty()) {
			continue;
		}
		std::stringstream ss(line);
		std::string cell;
		std::vector<double> row;
		while(std::getline(ss, cell, ',')) {
			row.push_back(std::stod(cell));
		}
		if(row.size() != table.header.size()) {
			throw IoError(path + ": row width does not match the header");
		}
		table.rows.push_back(std::move(row));
	}
	return table;
}

} // namespace pxpflow
