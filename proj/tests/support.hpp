#pragma once

#include "lifecycle.hpp"

#include "qax/error.hpp"

#include <gtest/gtest.h>


namespace qax::test {

#define EXPECT_QAX_ERROR(stmt, expected_code)                                                  \
    do {                                                                                       \
        try {                                                                                  \
            stmt;                                                                              \
            ADD_FAILURE() << "expected " << ::qax::to_string(expected_code) << ", no throw";    \
        } catch (const ::qax::Error& e_) {                                                     \
            EXPECT_EQ(e_.code(), expected_code) << e_.what();                                  \
        }                                                                                      \
    } while (0)

} // namespace qax::test
