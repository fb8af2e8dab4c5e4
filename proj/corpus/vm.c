#include <stdio.h>
#include <stdlib.h>

enum op { PUSH, ADD, SUB, MUL, DUP, SWAP, JZ, JMP, PRINT, DEC, HALT, OVER, DROP };

static const char *op_names[] = {"push", "add", "sub", "mul", "dup", "swap", "jz",
                                 "jmp",  "print", "dec", "halt", "over", "drop"};

/* acc n -> factorial of n */
static const int program[] = {
    PUSH, 1, PUSH, 6,
    DUP, JZ, 14,
    SWAP, OVER, MUL, SWAP, DEC, JMP, 4,
    DROP, PRINT, HALT,
};

static long stack[64];
static int trace_counts[13];

static long run(const int *code, int len, int start_value) {
  int sp = 0, pc = 0;
  long steps = 0;
  (void)start_value;
  while (pc < len && steps < 10000) {
    int op = code[pc++];
    trace_counts[op]++;
    steps++;
    switch (op) {
      case PUSH: stack[sp++] = code[pc++]; break;
      case ADD: sp--; stack[sp - 1] += stack[sp]; break;
      case SUB: sp--; stack[sp - 1] -= stack[sp]; break;
      case MUL: sp--; stack[sp - 1] *= stack[sp]; break;
      case DUP: stack[sp] = stack[sp - 1]; sp++; break;
      case SWAP: { long t = stack[sp - 1]; stack[sp - 1] = stack[sp - 2]; stack[sp - 2] = t; break; }
      case JZ: { int target = code[pc++]; if (stack[--sp] == 0) pc = target; break; }
      case JMP: pc = code[pc]; break;
      case PRINT: printf("out %ld\n", stack[sp - 1]); break;
      case DEC: stack[sp - 1]--; break;
      case OVER: stack[sp] = stack[sp - 2]; sp++; break;
      case DROP: sp--; break;
      case HALT: return steps;
      default: return -1;
    }
  }
  return steps;
}

int main(int argc, char **argv) {
  int n = argc > 1 ? atoi(argv[1]) : 6;
  int code[sizeof program / sizeof program[0]];
  for (size_t i = 0; i < sizeof code / sizeof code[0]; ++i) code[i] = program[i];
  code[3] = n;
  long steps = run(code, (int)(sizeof code / sizeof code[0]), n);
  printf("steps %ld\n", steps);
  for (int k = 0; k < 13; ++k)
    if (trace_counts[k]) printf("%s:%d ", op_names[k], trace_counts[k]);
  printf("\n");
  return 0;
}
