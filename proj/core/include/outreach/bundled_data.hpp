#pragma once

#include <string_view>

// Default lookup tables compiled in from data/. All are CSV text with a header.
namespace outreach::bundled {

std::string_view surnames();              // name,relative_frequency
std::string_view forenames();             // name,relative_frequency
std::string_view nicknames();             // name,alias
std::string_view street_abbreviations();  // abbreviation,expansion
std::string_view places();                // city,state,weight,zips
std::string_view streets();               // street_name

}  // namespace outreach::bundled
