#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nphf/puzzle.hpp"

namespace nphf {

// Canonical text: {"n": 3, "cells": [["D","R","DR"], ...]} with each cell's directions in
// index order (U,D,L,R,UL,UR,DL,DR), no trailing newline.
std::string domain_to_json(const PuzzleDomain& domain);

/// Accepts any whitespace and direction order. Throws InvalidDomain on malformed input.
PuzzleDomain domain_from_json(std::string_view text);

void save_domain(const PuzzleDomain& domain, const std::filesystem::path& path);
PuzzleDomain load_domain(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace nphf
