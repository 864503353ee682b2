# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter for stack programs; same contract as vm_numpy.run_program.

Rows are processed in fixed-size chunks so the operand stack stays in cache and
each opcode runs as one tight loop over the chunk.
"""

from libc.stdlib cimport malloc, free
from libc.math cimport NAN

cdef enum:
    CHUNK = 512

cdef enum:
    OP_CONST = 0
    OP_LOAD = 1
    OP_NEG = 2
    OP_ADD = 3
    OP_SUB = 4
    OP_MUL = 5
    OP_DIV = 6
    OP_LT = 7
    OP_LE = 8
    OP_GT = 9
    OP_GE = 10
    OP_EQ = 11
    OP_NE = 12
    OP_AND = 13
    OP_OR = 14
    OP_NOT = 15
    OP_IF = 16


def run_program(const int[::1] codes, const int[::1] args, const double[::1] consts,
                const double[:, ::1] columns, double[::1] out, unsigned char[::1] err):
    cdef Py_ssize_t n_ops = codes.shape[0]
    cdef Py_ssize_t n = columns.shape[1]
    cdef Py_ssize_t depth = 0, max_depth = 0, k
    for k in range(n_ops):
        if codes[k] == OP_CONST or codes[k] == OP_LOAD:
            depth += 1
        elif codes[k] == OP_IF:
            depth -= 2
        elif codes[k] != OP_NEG and codes[k] != OP_NOT:
            depth -= 1
        if depth > max_depth:
            max_depth = depth
    if max_depth < 1:
        raise ValueError("empty program")

    cdef double* vals = <double*> malloc(max_depth * CHUNK * sizeof(double))
    cdef unsigned char* errs = <unsigned char*> malloc(max_depth * CHUNK * sizeof(unsigned char))
    if vals == NULL or errs == NULL:
        free(vals)
        free(errs)
        raise MemoryError()

    cdef Py_ssize_t start, m, i, sp, code, arg
    cdef double* a
    cdef double* b
    cdef double* c
    cdef unsigned char* ea
    cdef unsigned char* eb
    cdef unsigned char* ec
    cdef double cv
    try:
        with nogil:
            start = 0
            while start < n:
                m = n - start
                if m > CHUNK:
                    m = CHUNK
                sp = 0
                for k in range(n_ops):
                    code = codes[k]
                    arg = args[k]
                    if code == OP_CONST:
                        a = vals + sp * CHUNK
                        ea = errs + sp * CHUNK
                        cv = consts[arg]
                        for i in range(m):
                            a[i] = cv
                            ea[i] = 0
                        sp += 1
                    elif code == OP_LOAD:
                        a = vals + sp * CHUNK
                        ea = errs + sp * CHUNK
                        for i in range(m):
                            a[i] = columns[arg, start + i]
                            ea[i] = 0
                        sp += 1
                    elif code == OP_NEG:
                        a = vals + (sp - 1) * CHUNK
                        for i in range(m):
                            a[i] = -a[i]
                    elif code == OP_NOT:
                        a = vals + (sp - 1) * CHUNK
                        for i in range(m):
                            a[i] = 1.0 if a[i] == 0.0 else 0.0
                    elif code == OP_IF:
                        c = vals + (sp - 3) * CHUNK
                        a = vals + (sp - 2) * CHUNK
                        b = vals + (sp - 1) * CHUNK
                        ec = errs + (sp - 3) * CHUNK
                        ea = errs + (sp - 2) * CHUNK
                        eb = errs + (sp - 1) * CHUNK
                        for i in range(m):
                            if c[i] != 0.0:
                                c[i] = a[i]
                                ec[i] = ec[i] | ea[i]
                            else:
                                c[i] = b[i]
                                ec[i] = ec[i] | eb[i]
                        sp -= 2
                    else:
                        a = vals + (sp - 2) * CHUNK
                        b = vals + (sp - 1) * CHUNK
                        ea = errs + (sp - 2) * CHUNK
                        eb = errs + (sp - 1) * CHUNK
                        for i in range(m):
                            ea[i] = ea[i] | eb[i]
                        if code == OP_ADD:
                            for i in range(m):
                                a[i] = a[i] + b[i]
                        elif code == OP_SUB:
                            for i in range(m):
                                a[i] = a[i] - b[i]
                        elif code == OP_MUL:
                            for i in range(m):
                                a[i] = a[i] * b[i]
                        elif code == OP_DIV:
                            for i in range(m):
                                if b[i] == 0.0:
                                    a[i] = NAN
                                    ea[i] = 1
                                else:
                                    a[i] = a[i] / b[i]
                        elif code == OP_LT:
                            for i in range(m):
                                a[i] = 1.0 if a[i] < b[i] else 0.0
                        elif code == OP_LE:
                            for i in range(m):
                                a[i] = 1.0 if a[i] <= b[i] else 0.0
                        elif code == OP_GT:
                            for i in range(m):
                                a[i] = 1.0 if a[i] > b[i] else 0.0
                        elif code == OP_GE:
                            for i in range(m):
                                a[i] = 1.0 if a[i] >= b[i] else 0.0
                        elif code == OP_EQ:
                            for i in range(m):
                                a[i] = 1.0 if a[i] == b[i] else 0.0
                        elif code == OP_NE:
                            for i in range(m):
                                a[i] = 1.0 if a[i] != b[i] else 0.0
                        elif code == OP_AND:
                            for i in range(m):
                                a[i] = 1.0 if (a[i] != 0.0 and b[i] != 0.0) else 0.0
                        elif code == OP_OR:
                            for i in range(m):
                                a[i] = 1.0 if (a[i] != 0.0 or b[i] != 0.0) else 0.0
                        sp -= 1
                for i in range(m):
                    out[start + i] = vals[i]
                    err[start + i] = errs[i]
                start += m
    finally:
        free(vals)
        free(errs)
