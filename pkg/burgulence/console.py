import functools
import typing as tp

from rich.console import Console

from burgulence.utils import mytimer

console = Console(log_path=False)

F = tp.TypeVar('F', bound=tp.Callable[..., tp.Any])


def spinner(console: Console, msg: str, spinner: str = "dots", done: tp.Optional[str] = None) -> tp.Callable[[F], F]:
    """status spinner while the call blocks; prints done with the elapsed seconds afterwards"""
    def decorator_spinner(func: F) -> F:
        @functools.wraps(func)
        def wrapper_decorator(*args: tp.Any, **kwargs: tp.Any) -> tp.Any:
            t = mytimer()
            with console.status(msg, spinner=spinner):
                value = func(*args, **kwargs)
            if done is not None:
                console.print(f"[green] {done} in {t.get} sec")
            return value

        return tp.cast(F, wrapper_decorator)

    return decorator_spinner
