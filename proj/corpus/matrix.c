#include <stdio.h>
#include <stdlib.h>

#define N 12

static int a[N][N];
static int b[N][N];
static long c[N][N];
static const int weights[N] = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8};

static void fill(int seed) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      a[i][j] = (i * 7 + j * 3 + seed) % 11 - 5;
      b[i][j] = (i * 5 + j * 9 + seed * 2) % 13 - 6;
    }
}

static void multiply(void) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      long s = 0;
      for (int k = 0; k < N; ++k) s += (long)a[i][k] * b[k][j];
      c[i][j] = s;
    }
}

static long trace_weighted(void) {
  long t = 0;
  for (int i = 0; i < N; ++i) t += c[i][i] * weights[i];
  return t;
}

int main(int argc, char **argv) {
  int seed = argc > 1 ? atoi(argv[1]) : 1;
  fill(seed);
  multiply();
  for (int i = 0; i < N; i += 3) {
    for (int j = 0; j < N; j += 2) printf("%6ld", c[i][j]);
    printf("\n");
  }
  printf("trace %ld\n", trace_weighted());
  return 0;
}
