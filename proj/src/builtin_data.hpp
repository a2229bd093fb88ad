#pragma once

// Generated at configure time from data/*.csv (see cmake/embed_data.cmake).
namespace asraudit::builtin {
extern const char* const kWadaTableCsv;
extern const char* const kAgeBinsCsv;
}  // namespace asraudit::builtin
