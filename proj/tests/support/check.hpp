#ifndef MACC_TESTS_CHECK_HPP
#define MACC_TESTS_CHECK_HPP

#include "macc/errors.hpp"

#include <doctest.h>

// Fails unless `expr` throws macc::Error carrying `code`.
#define CHECK_ERRC(expr, code)                                                                                  \
  do                                                                                                            \
    {                                                                                                           \
      bool thrown_ = false;                                                                                     \
      try                                                                                                       \
        {                                                                                                       \
          (void) (expr);                                                                                        \
        }                                                                                                       \
      catch (const macc::Error &e_)                                                                             \
        {                                                                                                       \
          thrown_ = true;                                                                                       \
          CHECK_MESSAGE (e_.Code () == (code), e_.what ());                                                     \
        }                                                                                                       \
      CHECK_MESSAGE (thrown_, #expr " did not throw");                                                          \
    }                                                                                                           \
  while (false)

#endif
