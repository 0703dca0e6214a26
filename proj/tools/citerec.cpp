#include <exception>
#include <iostream>

#include "citerec/error.hpp"
#include "citerec/harness.hpp"

int main(int argc, char** argv) {
  try {
    return citerec::cli(argc, argv);
  } catch (const citerec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
