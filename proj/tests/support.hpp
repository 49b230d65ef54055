#pragma once

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "w2s/error.hpp"

namespace testing_support {

/// Fresh per-test scratch directory under the system temp path.
inline std::filesystem::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() /
             ("w2s_test_" + std::string(info->test_suite_name()) + "_" + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support

#define EXPECT_ERRC(stmt, errc)                                        \
  do {                                                                 \
    try {                                                              \
      stmt;                                                            \
      ADD_FAILURE() << "expected " << w2s::to_string(errc);            \
    } catch (const w2s::Error& e) {                                    \
      EXPECT_EQ(e.code(), errc) << e.what();                           \
    }                                                                  \
  } while (0)
