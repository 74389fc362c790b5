#include <cstdio>

int main() {
  std::puts("thurston: command dispatch not wired yet");
  return 2;
}
