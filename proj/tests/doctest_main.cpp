#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "speclift/linalg.hpp"

int main(int argc, char** argv) {
  speclift::tune_allocator();
  return doctest::Context(argc, argv).run();
}
