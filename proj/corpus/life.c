#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define W 24
#define H 12

static char grid[H][W];
static char next[H][W];
static const signed char dx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
static const signed char dy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

static int neighbours(int y, int x) {
  int n = 0;
  for (int k = 0; k < 8; ++k) {
    int yy = (y + dy[k] + H) % H, xx = (x + dx[k] + W) % W;
    n += grid[yy][xx];
  }
  return n;
}

static void step(void) {
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      int n = neighbours(y, x);
      next[y][x] = n == 3 || (n == 2 && grid[y][x]);
    }
  memcpy(grid, next, sizeof grid);
}

int main(int argc, char **argv) {
  int gens = argc > 1 ? atoi(argv[1]) : 8;
  grid[1][2] = grid[2][3] = grid[3][1] = grid[3][2] = grid[3][3] = 1;
  grid[6][10] = grid[6][11] = grid[6][12] = 1;
  for (int g = 0; g < gens; ++g) step();
  int alive = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      putchar(grid[y][x] ? '#' : '.');
      alive += grid[y][x];
    }
    putchar('\n');
  }
  printf("alive %d\n", alive);
  return 0;
}
