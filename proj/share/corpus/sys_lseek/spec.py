def sys_lseek(old, fd, offset):
    cond = z3.And(
        z3.ULT(fd, dt.NOFILE),
        z3.Not(offset < 0))

    new = old.copy()
    new.procs[old.current].offs[fd] = offset
    return cond, util.If(cond, new, old)
