#include <iostream>

int main() {
  std::cout << "gast cli placeholder\n";
  return 0;
}
