#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "couponmdp/errors.hpp"

namespace couponmdp {

// RFC 4180 quoting: fields containing commas, quotes, or line breaks are
// wrapped in quotes with embedded quotes doubled.
std::string csv_field(const std::string& s);

// Stable numeric formatting for CSV cells.
std::string csv_num(double v);

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    void row(const std::vector<std::string>& fields);

  private:
    std::ofstream out_;
};

}  // namespace couponmdp
