#include <stdio.h>
#include <stdlib.h>

#define DIGITS 400

static unsigned char digits[DIGITS];
static int used = 1;

static void multiply(int k) {
  int carry = 0;
  for (int i = 0; i < used; ++i) {
    int v = digits[i] * k + carry;
    digits[i] = (unsigned char)(v % 10);
    carry = v / 10;
  }
  while (carry && used < DIGITS) {
    digits[used++] = (unsigned char)(carry % 10);
    carry /= 10;
  }
}

int main(int argc, char **argv) {
  int n = argc > 1 ? atoi(argv[1]) : 60;
  digits[0] = 1;
  for (int k = 2; k <= n; ++k) multiply(k);
  printf("%d! = ", n);
  for (int i = used - 1; i >= 0; --i) putchar('0' + digits[i]);
  int sum = 0;
  for (int i = 0; i < used; ++i) sum += digits[i];
  printf("\ndigits %d sum %d\n", used, sum);
  return 0;
}
