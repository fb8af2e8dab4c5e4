#include <stdio.h>
#include <stdlib.h>
#include <string.h>

typedef long (*binop)(long, long);

static long op_add(long a, long b) { return a + b; }
static long op_sub(long a, long b) { return a - b; }
static long op_mul(long a, long b) { return a * b; }
static long op_div(long a, long b) { return b ? a / b : 0; }
static long op_mod(long a, long b) { return b ? a % b : 0; }
static long op_max(long a, long b) { return a > b ? a : b; }

struct op_entry {
  const char *name;
  char symbol;
  binop fn;
};

static struct op_entry ops[] = {
    {"add", '+', op_add}, {"sub", '-', op_sub}, {"mul", '*', op_mul},
    {"div", '/', op_div}, {"mod", '%', op_mod}, {"max", '^', op_max},
};

static binop lookup(char c) {
  for (size_t i = 0; i < sizeof ops / sizeof ops[0]; ++i)
    if (ops[i].symbol == c) return ops[i].fn;
  return NULL;
}

static long eval_rpn(const char *expr) {
  long stack[64];
  int sp = 0;
  for (const char *p = expr; *p; ++p) {
    if (*p >= '0' && *p <= '9') {
      long v = 0;
      while (*p >= '0' && *p <= '9') v = v * 10 + (*p++ - '0');
      stack[sp++] = v;
      --p;
    } else if (*p != ' ') {
      binop f = lookup(*p);
      if (f && sp >= 2) {
        long b = stack[--sp];
        long a = stack[--sp];
        stack[sp++] = f(a, b);
      }
    }
  }
  return sp ? stack[sp - 1] : 0;
}

int main(int argc, char **argv) {
  const char *exprs[] = {"3 4 +", "10 2 8 * + 3 -", "100 7 %", "6 7 ^ 5 *", "81 3 / 2 /"};
  for (size_t i = 0; i < sizeof exprs / sizeof exprs[0]; ++i) printf("%s = %ld\n", exprs[i], eval_rpn(exprs[i]));
  for (int i = 1; i < argc; ++i) printf("%s = %ld\n", argv[i], eval_rpn(argv[i]));
  for (size_t i = 0; i < sizeof ops / sizeof ops[0]; ++i)
    printf("%s(%c) 17,5 -> %ld\n", ops[i].name, ops[i].symbol, ops[i].fn(17, 5));
  return 0;
}
