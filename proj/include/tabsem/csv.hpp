// Copyright 2026 The tabsem Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TABSEM_CSV_HPP_
#define TABSEM_CSV_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tabsem {

using CsvRows = std::vector<std::vector<std::string>>;

// RFC-4180: quoted fields may contain separators, line breaks and doubled
// quotes. Accepts LF or CRLF line endings; a trailing newline does not add
// an empty record. A leading UTF-8 BOM is skipped.
CsvRows ParseCsv(std::string_view text);
CsvRows ReadCsvFile(const std::string& path);

std::string WriteCsv(const CsvRows& rows);

}  // namespace tabsem

#endif  // TABSEM_CSV_HPP_
